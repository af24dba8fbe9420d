use clap::Parser;

fn main() {
    let cli = cubic_cli::args::Cli::parse();
    if let Err(e) = cubic_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
