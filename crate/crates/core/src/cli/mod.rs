//! Command-line front end. Every subcommand writes its artifacts into `--out`
//! together with a JSON sidecar that records the full run configuration.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numeric failure.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::estimation::Objective;
use crate::seed::DEFAULT_MASTER_SEED;

pub use output::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "longmem", version, about = "Estimation and diagnostics for long-memory Gaussian series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path by circulant embedding.
    Simulate(SimulateArgs),
    /// Fit the memory parameter(s) to a series.
    Estimate(EstimateArgs),
    /// Spectral Fisher information at θ.
    Fisher(FisherArgs),
    /// Largest Lipschitz quotient over a θ grid and a superexponential frequency grid.
    #[command(name = "check-a9")]
    CheckA9(CheckA9Args),
    /// Quotient at the witnesses θ_n = d' − 1/(2n), ln x = −n ln n.
    Counterexample(CounterexampleArgs),
    /// Monte Carlo exceedance table for increments of Z_N over δ-close pairs.
    Equicont(EquicontArgs),
    /// Z_N(θ) along a d mesh for one simulated (or supplied) series.
    Zprofile(ZprofileArgs),
    /// Monte Carlo sampling distribution of the estimator.
    #[command(name = "mc-normality")]
    McNormality(McNormalityArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// θ values (comma separated); defaults to the model file's parameters.
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Series CSV with header `x`.
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long, value_enum, default_value = "whittle")]
    pub objective: Objective,
    /// Centre at this known mean instead of the sample mean.
    #[arg(long)]
    pub known_mean: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct FisherArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    /// Gauss–Legendre order per panel.
    #[arg(long, default_value_t = crate::estimation::DEFAULT_FISHER_ORDER)]
    pub order: usize,
    /// Information for θ with σ² estimated jointly.
    #[arg(long)]
    pub profile_scale: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckA9Args {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    pub d_prime: f64,
    /// Witness index range `a..b` (inclusive); one frequency `ln x = −n ln n` per index.
    #[arg(long, default_value = "2..2000", value_parser = parse_range)]
    pub n: (u64, u64),
    /// Number of θ grid points `d' − 1/(2n)`, with `n` log-spaced over the range.
    #[arg(long, default_value_t = 40)]
    pub theta_points: usize,
    /// Mesh step for the continuity scan of α.
    #[arg(long, default_value_t = 0.01)]
    pub alpha_step: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct CounterexampleArgs {
    /// Model file; defaults to the generic family with h ≡ 1.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    pub d_prime: f64,
    #[arg(long, default_value = "2..100", value_parser = parse_range)]
    pub n: (u64, u64),
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct EquicontArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub theta0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "256,1024")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.005,0.01,0.02,0.05")]
    pub delta: Vec<f64>,
    #[arg(long, default_value_t = crate::equicontinuity_lab::DEFAULT_ETA)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0025)]
    pub grid_step: f64,
    #[arg(long, default_value_t = 0.1)]
    pub d_min: f64,
    #[arg(long, default_value_t = 0.45)]
    pub d_max: f64,
    #[arg(long, default_value_t = crate::equicontinuity_lab::DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ZprofileArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub theta0: Option<Vec<f64>>,
    /// Use this series instead of simulating one.
    #[arg(long, conflicts_with = "n")]
    pub series: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0025)]
    pub grid_step: f64,
    #[arg(long, default_value_t = 0.1)]
    pub d_min: f64,
    #[arg(long, default_value_t = 0.45)]
    pub d_max: f64,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct McNormalityArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub theta0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "512,2048")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "whittle")]
    pub objective: Objective,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
    Numeric(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Lib(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Lib(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Lib(e) if e.is_numeric() => write!(f, "numeric failure: {e}"),
            CliError::Lib(e) => write!(f, "error: {e}"),
        }
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<String, CliError> {
    let common = match &command {
        Command::Simulate(a) => &a.common,
        Command::Estimate(a) => &a.common,
        Command::Fisher(a) => &a.common,
        Command::CheckA9(a) => &a.common,
        Command::Counterexample(a) => &a.common,
        Command::Equicont(a) => &a.common,
        Command::Zprofile(a) => &a.common,
        Command::McNormality(a) => &a.common,
    }
    .clone();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match &command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Fisher(a) => commands::fisher(a),
        Command::CheckA9(a) => commands::check_a9(a),
        Command::Counterexample(a) => commands::counterexample(a),
        Command::Equicont(a) => commands::equicont(a),
        Command::Zprofile(a) => commands::zprofile(a),
        Command::McNormality(a) => commands::mc_normality(a),
    })
}
