//! `spikelab` command-line front end.
//!
//! Exit codes: 0 on success, 1 on a parameter error or unknown flag, 2 on an
//! internal failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Parser)]
#[command(name = "spikelab", version, about = "Spectra of deformed GOE and spiked covariance matrices")]
struct Cli {
    /// Master seed for every random quantity.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for Monte Carlo replicates. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one matrix and print its spectrum.
    Sample(SampleArgs),
    /// Deterministic limits, Stieltjes values, or a deviation bound.
    Limits(LimitsArgs),
    /// Build and certify an epsilon-net.
    Net(NetArgs),
    /// Approximate eigenvector diagnostics for one draw.
    #[command(name = "approx-ev")]
    ApproxEv(ApproxEvArgs),
    /// Invert observed eigenvalues into spike estimates.
    Estimate(EstimateArgs),
    /// Monte Carlo tail checks against a bound, or auxiliary audits.
    Verify(VerifyArgs),
    /// Fluctuation sweep of one eigenvalue over sample sizes.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Goe,
    Spiked,
}

#[derive(Args, Serialize, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = Model::Goe)]
    pub model: Model,
    #[arg(long)]
    pub n: usize,
    /// Row dimension (spiked model).
    #[arg(long)]
    pub p: Option<usize>,
    /// Noise scale (GOE model).
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Comma-separated θ_i (GOE) or θ_i² (spiked), non-increasing.
    #[arg(long, value_delimiter = ',')]
    pub spikes: Vec<f64>,
}

#[derive(Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremArg {
    T1i,
    T1ii,
    T2i,
    T2ii,
    T3i,
    T3ii,
}

#[derive(Args, Serialize)]
pub struct LimitsArgs {
    #[arg(long, value_enum, default_value_t = Model::Goe)]
    pub model: Model,
    /// Spike strength θ (GOE).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Population spike θ² (spiked).
    #[arg(long = "theta-sq")]
    pub theta_sq: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Aspect ratio (spiked).
    #[arg(long)]
    pub c: Option<f64>,
    /// Evaluate this bound instead of a limit map.
    #[arg(long, value_enum)]
    pub theorem: Option<TheoremArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub i: usize,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, value_delimiter = ',')]
    pub spikes: Vec<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub c3: Option<f64>,
}

#[derive(Args, Serialize)]
pub struct NetArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub epsilon: f64,
    /// Uniform samples for the coverage check.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Args, Serialize)]
pub struct ApproxEvArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// 1-based spike index.
    #[arg(long, default_value_t = 1)]
    pub i: usize,
    /// Target the i-th smallest eigenvalue (spiked model).
    #[arg(long)]
    pub smallest: bool,
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
    /// Include the vector itself in JSON output.
    #[arg(long)]
    pub vector: bool,
}

#[derive(Args, Serialize)]
pub struct EstimateArgs {
    /// A single observed eigenvalue.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// File of eigenvalues, one per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Sample count for eigenvalue files (c = p/n).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "r-max", default_value_t = 5)]
    pub r_max: usize,
    /// Rescale by the mean of all but the top R eigenvalues first.
    #[arg(long)]
    pub normalize: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Audit {
    ChiSquare,
    Interlacing,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    /// Experiment plan as JSON.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub audit: Option<Audit>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',')]
    pub spikes: Vec<f64>,
    #[arg(long, value_enum)]
    pub theorem: Option<TheoremArg>,
    #[arg(long, default_value_t = 1)]
    pub i: usize,
    #[arg(long = "t-grid", value_delimiter = ',')]
    pub t_grid: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub c3: Option<f64>,
    /// Chi-square weights.
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Top,
    Bottom,
}

#[derive(Args, Serialize)]
pub struct SweepArgs {
    /// Sweep plan as JSON.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Model::Goe)]
    pub model: Model,
    /// Base row dimension (spiked); scaled with n.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',')]
    pub spikes: Vec<f64>,
    #[arg(long = "n-list", value_delimiter = ',')]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, value_enum, default_value_t = Side::Top)]
    pub side: Side,
    #[arg(long, default_value_t = 1)]
    pub i: usize,
}

/// A failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Parameter(String),
    Internal(String),
}

impl From<spikelab::error::Error> for CliError {
    fn from(e: spikelab::error::Error) -> Self {
        if e.is_parameter_error() {
            CliError::Parameter(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

/// The invocation with `--out` and `--threads` removed, since neither
/// affects the output.
fn canonical_command() -> String {
    let mut parts = vec!["spikelab".to_string()];
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--out" || a == "--threads" {
            args.next();
        } else if !(a.starts_with("--out=") || a.starts_with("--threads=")) {
            parts.push(a);
        }
    }
    parts.join(" ")
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Parameter("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Internal(format!("cannot start thread pool: {e}")))?;
    }
    let seed = cli.seed;
    let output = match &cli.command {
        Command::Sample(a) => commands::sample_cmd(a, seed.unwrap_or(0))?,
        Command::Limits(a) => commands::limits(a)?,
        Command::Net(a) => commands::net(a, seed.unwrap_or(0))?,
        Command::ApproxEv(a) => commands::approx_ev(a, seed.unwrap_or(0))?,
        Command::Estimate(a) => commands::estimate(a)?,
        Command::Verify(a) => commands::verify(a, seed)?,
        Command::Sweep(a) => commands::sweep(a, seed)?,
    };
    let text = output.render(cli.format, &canonical_command());
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Parameter(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
