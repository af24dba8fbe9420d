//! Compiles the code blocks of the guide as doc-tests.

#[cfg(doctest)]
macro_rules! chapters {
    ($($name:ident => $file:literal),* $(,)?) => {
        $(
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            pub mod $name {}
        )*
    };
}

#[cfg(doctest)]
chapters! {
    introduction => "introduction.md",
    conventions => "conventions.md",
    cubic_state => "cubic-state.md",
    optimal_squeezing => "optimal-squeezing.md",
    fock_numerics => "fock-numerics.md",
    moments => "moments.md",
    noise => "noise.md",
    protocols => "protocols.md",
    cli => "cli.md",
    verification => "verification.md",
}
