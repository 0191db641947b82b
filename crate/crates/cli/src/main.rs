//! `spline2relu`: compile splines into ReLU networks, verify them, and run
//! the approximation and Riesz experiments.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "spline2relu", version, about)]
pub struct Cli {
    /// Network width W.
    #[arg(long, global = true, default_value_t = 8)]
    pub width: usize,
    /// Points of the uniform evaluation grid.
    #[arg(long, global = true, default_value_t = 10_001)]
    pub grid: usize,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Main output file (network or CSV, depending on the command).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write an SVG plot here.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a spline file into a network file and print the size report.
    Compile { spline: PathBuf },
    /// Maximum deviation between a network and a spline on [0, 1].
    Verify {
        network: PathBuf,
        spline: PathBuf,
        /// Exit with an error if the deviation exceeds this.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Evaluate a network or spline file at the given points (default: the grid).
    Eval {
        file: PathBuf,
        #[arg(long = "x", allow_negative_numbers = true)]
        xs: Vec<f64>,
    },
    /// Error against size for a family of networks, as CSV.
    Rates {
        #[arg(long, value_enum, default_value_t = Family::Takagi)]
        family: Family,
        /// Comma-separated list or range `a..b` (inclusive).
        #[arg(long)]
        ms: Option<String>,
        /// Hölder exponent for the Lip-α families.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Record measured wall times instead of 0.
        #[arg(long)]
        timing: bool,
        /// Also report the empirical seminorm max (m+1)^r · error.
        #[arg(long)]
        r: Option<f64>,
    },
    /// Frame bounds, operator gaps and the double-sum lemma.
    Riesz {
        /// Truncation for the frame bounds.
        #[arg(long, default_value_t = 32)]
        k: usize,
        /// Truncation for the operator gaps.
        #[arg(long, default_value_t = 64)]
        gap_k: usize,
        /// Random sequences for the double-sum check.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Network for a partial Takagi sum and its error.
    Takagi {
        #[arg(long, default_value_t = 10)]
        m: usize,
        /// Use coefficients 4^-k, which sum to x(1 - x).
        #[arg(long)]
        parabola: bool,
    },
    /// Network for a sum of C_j and S_j terms.
    Fourier {
        /// Terms `j:a:b`, comma-separated.
        #[arg(long)]
        terms: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Dyadic Takagi partial sums against the order m+20 sum.
    Takagi,
    /// Coefficients 4^-k against x(1 - x).
    Parabola,
    /// Lip-1 approximant of |x - 1/2|.
    Kink,
    /// Lip-α approximant of |x - 1/2|^α.
    Root,
    /// Lip-α approximant of a random member of the unit Lip-α ball (uses --seed).
    Random,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SPLINE2RELU_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
