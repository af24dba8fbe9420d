//! Command-line harness: one subcommand per figure data set, a single-point
//! query and the acceptance check runner.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use std::path::PathBuf;

use args::{Cli, Command, Common};
use error::{CliError, CliResult};
use output::{render, schema, write_bytes, Row};

/// File to write, or `None` for standard output.
pub fn output_path(name: &str, common: &Common) -> CliResult<Option<PathBuf>> {
    let path = match (&common.out, &common.out_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.clone(), source })?;
            dir.join(format!("{name}.{}", common.format.extension()))
        }
        (None, None) => return Ok(None),
    };
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
    if !parent.is_dir() || path.is_dir() {
        return Err(CliError::Output {
            path,
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory missing or target is a directory"),
        });
    }
    Ok(Some(path))
}

/// Rows for every data command; `verify` is handled by [`run`].
pub fn rows(command: &Command) -> CliResult<Vec<Row>> {
    use commands::*;
    match command {
        Command::Fig1b { r, s, .. } => fig1b(r, s),
        Command::Fig2 { n, .. } => fig2(n),
        Command::Fig3b { gamma, n, dim, common } => fig3b(gamma, *n, *dim, common),
        Command::Fig3c { sigma, n, common } => fig3c(sigma, *n, common),
        Command::Fig4 { grid, common } => fig4(grid, common),
        Command::SmFigRus { n_iter, grid, common } => sm_fig_rus(n_iter, grid, common),
        Command::SmFigKerr { lambda, grid, common } => sm_fig_kerr(lambda, grid, common),
        Command::SmFigTrisqueeze { t, dim, common } => sm_fig_trisqueeze(t, *dim, common),
        Command::SmFigDisplacement { r, s, .. } => sm_fig_displacement(r, s),
        Command::Point { r, s, common } => point(*r, *s, common),
        Command::Verify { only, common } => Ok(commands::verify_rows(&commands::verify(only, common)?)),
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let name = cli.command.name();
    let common = cli.command.common();
    let schema = schema(name)?;
    let path = output_path(name, common)?;
    if let Command::Verify { only, .. } = &cli.command {
        let reports = commands::verify(only, common)?;
        for r in &reports {
            println!("{}", r.line());
        }
        let passed = reports.iter().filter(|r| r.pass).count();
        println!("{passed}/{} criteria pass", reports.len());
        if path.is_some() {
            let bytes = render(&schema, &commands::verify_rows(&reports), common.format)?;
            write_bytes(path.as_deref(), &bytes)?;
        }
        return Ok(());
    }
    let rows = rows(&cli.command)?;
    let bytes = render(&schema, &rows, common.format)?;
    write_bytes(path.as_deref(), &bytes)
}
