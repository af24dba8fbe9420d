use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;

/// `start:end:points`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Range {
    pub fn linear(&self) -> Vec<f64> {
        let denom = self.points.saturating_sub(1).max(1) as f64;
        (0..self.points).map(|i| self.start + (self.end - self.start) * i as f64 / denom).collect()
    }

    pub fn logarithmic(&self) -> Vec<f64> {
        let (a, b) = (self.start.ln(), self.end.ln());
        let denom = self.points.saturating_sub(1).max(1) as f64;
        (0..self.points)
            .map(|i| if i == 0 { self.start } else if i + 1 == self.points { self.end } else { (a + (b - a) * i as f64 / denom).exp() })
            .collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let r = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Range { start: v, end: v, points: 1 }
            }
            [a, b, n] => Range {
                start: num(a)?,
                end: num(b)?,
                points: n.trim().parse().map_err(|e| format!("bad point count {n:?}: {e}"))?,
            },
            _ => return Err(format!("expected START:END:POINTS or a single value, got {s:?}")),
        };
        if !r.start.is_finite() || !r.end.is_finite() {
            return Err("range bounds must be finite".into());
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; takes precedence over --out-dir.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Directory receiving `<command>.<format>` when --out is absent.
    #[arg(long, env = "CUBIC_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Seed for the stochastic checks of `verify`.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Largest Fock dimension the automatic truncation may reach.
    #[arg(long, default_value_t = 4096)]
    pub max_dim: usize,
    /// Tolerated population in the top Fock levels.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Parser)]
#[command(name = "cubic", version, about = "Cubic phase state phase sensing: figure data and self-checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// F_Q/n over the (r, s) plane with the optimal-squeezing trace.
    Fig1b {
        #[arg(long, default_value = "0:0.5:101", allow_hyphen_values = true)]
        r: Range,
        #[arg(long, default_value = "0:0.6:101")]
        s: Range,
        #[command(flatten)]
        common: Common,
    },
    /// Optimized sensitivity and nonlinear squeezing versus n (log grid).
    Fig2 {
        #[arg(long, default_value = "0.01:10000:121")]
        n: Range,
        #[command(flatten)]
        common: Common,
    },
    /// Decay under photon loss at fixed population.
    Fig3b {
        #[arg(long, default_value = "0:1:11")]
        gamma: Range,
        #[arg(long, default_value_t = 0.2)]
        n: f64,
        /// Fixed Fock dimension; chosen from the lossless state otherwise.
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Decay under Gaussian detection noise at fixed population.
    Fig3c {
        #[arg(long, default_value = "0:2:81")]
        sigma: Range,
        #[arg(long, default_value_t = 0.2)]
        n: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Envelopes of all preparation protocols.
    Fig4 {
        #[command(flatten)]
        grid: ProtocolGrid,
        #[command(flatten)]
        common: Common,
    },
    /// Repeat-until-success envelopes for several iteration counts.
    #[command(name = "sm_fig_rus", alias = "sm-fig-rus")]
    SmFigRus {
        #[arg(long = "n-iter", value_delimiter = ',', default_value = "1,2,3,4,5")]
        n_iter: Vec<u32>,
        #[command(flatten)]
        grid: ProtocolGrid,
        #[command(flatten)]
        common: Common,
    },
    /// Kerr-sandwich envelopes per squeezing gain, plus the plain Kerr oscillator.
    #[command(name = "sm_fig_kerr", alias = "sm-fig-kerr")]
    SmFigKerr {
        #[arg(long, default_value = "2:5:4")]
        lambda: Range,
        #[command(flatten)]
        grid: ProtocolGrid,
        #[command(flatten)]
        common: Common,
    },
    /// Trisqueezed vacuum versus triplicity; unconverged points are flagged.
    #[command(name = "sm_fig_trisqueeze", alias = "sm-fig-trisqueeze")]
    SmFigTrisqueeze {
        #[arg(long, default_value = "0:2:201")]
        t: Range,
        #[arg(long, default_value_t = 600)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Displacement-sensing QFI against squeezed vacuum.
    #[command(name = "sm_fig_displacement", alias = "sm-fig-displacement")]
    SmFigDisplacement {
        #[arg(long, default_value = "0:0.3:31", allow_hyphen_values = true)]
        r: Range,
        #[arg(long, default_value = "0:1:21")]
        s: Range,
        #[command(flatten)]
        common: Common,
    },
    /// Every quantity at a single (r, s).
    Point {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance criteria and print one line per criterion.
    Verify {
        /// Comma-separated criterion ids; all when absent.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fig1b { .. } => "fig1b",
            Command::Fig2 { .. } => "fig2",
            Command::Fig3b { .. } => "fig3b",
            Command::Fig3c { .. } => "fig3c",
            Command::Fig4 { .. } => "fig4",
            Command::SmFigRus { .. } => "sm_fig_rus",
            Command::SmFigKerr { .. } => "sm_fig_kerr",
            Command::SmFigTrisqueeze { .. } => "sm_fig_trisqueeze",
            Command::SmFigDisplacement { .. } => "sm_fig_displacement",
            Command::Point { .. } => "point",
            Command::Verify { .. } => "verify",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Fig1b { common, .. }
            | Command::Fig2 { common, .. }
            | Command::Fig3b { common, .. }
            | Command::Fig3c { common, .. }
            | Command::Fig4 { common, .. }
            | Command::SmFigRus { common, .. }
            | Command::SmFigKerr { common, .. }
            | Command::SmFigTrisqueeze { common, .. }
            | Command::SmFigDisplacement { common, .. }
            | Command::Point { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }
}

/// Overrides for the protocol scan grids; library defaults otherwise.
#[derive(Debug, Clone, Default, Args)]
pub struct ProtocolGrid {
    /// Cubicity axis (quadratically spaced towards zero).
    #[arg(long)]
    pub r: Option<Range>,
    #[arg(long)]
    pub s: Option<Range>,
    /// Fock dimension for the Kerr scans.
    #[arg(long)]
    pub kerr_dim: Option<usize>,
}
