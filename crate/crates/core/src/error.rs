use thiserror::Error;

/// Errors raised by the numerical and closed-form layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: at least {min} required")]
    InvalidDimension { dim: usize, min: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation error: tail mass {tail:e} exceeds tolerance {tol:e} at dim {dim}")]
    Truncation { dim: usize, tail: f64, tol: f64 },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("population {n} infeasible at squeezing {s}: n must be at least sinh^2(s) = {min}")]
    InfeasiblePopulation { n: f64, s: f64, min: f64 },

    #[error("no admissible root of the stationarity quartic; candidates (re, im): {roots:?}")]
    NoAdmissibleRoot { roots: Vec<(f64, f64)> },

    #[error("covariance matrix is singular beyond the pseudo-inverse cutoff (condition number {condition:e})")]
    SingularCovariance { condition: f64 },

    #[error("imaginary residue {residue:e} in a quantity that must be real")]
    ImaginaryResidue { residue: f64 },

    #[error("observable order {0} outside 1..=4")]
    InvalidOrder(usize),

    #[error("undefined ratio: population is zero")]
    ZeroPopulation,

    #[error("integrator failure: trace drift {drift:e}; increase the number of steps")]
    Integrator { drift: f64 },

    #[error("closed forms exist only for N in 1..=5, got N = {0}")]
    UnsupportedAnalyticOrder(usize),

    #[error("not converged: <n> = {at_dim} at dim {dim} but {at_double} at dim {double_dim}")]
    NotConverged {
        dim: usize,
        at_dim: f64,
        double_dim: usize,
        at_double: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty parameter grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
