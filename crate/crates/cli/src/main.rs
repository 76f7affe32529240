//! `ergopt`: batch front end for the ergopt library.
//!
//! Exit codes: 0 success, 1 usage, 2 validation, 3 certificate or suite
//! failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Failure;
use crate::config::Config;

#[derive(Parser, Debug)]
#[command(name = "ergopt", version, about = "Exact ergodic optimization on the full shift")]
struct Cli {
    /// Also render every exact rational as a decimal.
    #[arg(long, global = true)]
    float: bool,
    /// TOML file with defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Record wall-clock time in the manifest.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Variations, tail sums and the A-norm of a function.
    Norm(NormArgs),
    /// Maximum ergodic average over invariant measures and the optimal cycles.
    Maximize(MaximizeArgs),
    /// Sub-action and nonpositive cohomologous normal form, with certificates.
    NormalForm(NormalFormArgs),
    /// Build a lock-in perturbation plan.
    Perturb(PerturbArgs),
    /// Solve sampled perturbations of a plan exactly.
    Lockin(LockinArgs),
    /// Run randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct NormArgs {
    pub function: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MaximizeArgs {
    pub function: PathBuf,
    /// Compare against enumeration of all orbits up to this period.
    #[arg(long, value_name = "P")]
    pub oracle_period: Option<usize>,
    /// Write the optimal cycles as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NormalFormArgs {
    pub function: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    pub function: PathBuf,
    /// Ball radius parameter, a rational in (0, 1).
    #[arg(long, value_name = "P/Q", allow_hyphen_values = true)]
    pub epsilon: Option<String>,
    /// Recurrence depth; chosen automatically (theorem mode) when absent.
    #[arg(long)]
    pub k: Option<usize>,
    /// Depth of the truncated penalty table.
    #[arg(long = "K", alias = "truncation-depth", value_name = "K")]
    pub truncation_depth: Option<usize>,
    /// Largest allowed penalty table.
    #[arg(long)]
    pub table_limit: Option<u128>,
    /// Plan file; without it the plan goes to stdout and the summary to stderr.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SamplingArg {
    Multiscale,
    Uniform,
}

#[derive(Args, Debug)]
pub struct LockinArgs {
    pub plan: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub sampling: Option<SamplingArg>,
    /// Search for the largest radius at which every trial still locks.
    #[arg(long)]
    pub empirical_radius: bool,
    /// Sampled trials per radius probe.
    #[arg(long)]
    pub directions: Option<usize>,
    #[arg(long)]
    pub bisections: Option<usize>,
    /// Backward walks from this many random points.
    #[arg(long)]
    pub walks: Option<usize>,
    #[arg(long)]
    pub walk_steps: Option<usize>,
    /// Write per-trial margins as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Instances per suite (default: each suite's own size).
    #[arg(long)]
    pub instances: Option<usize>,
    /// Re-run a single instance index.
    #[arg(long)]
    pub only: Option<usize>,
    /// Directory for counterexample files.
    #[arg(long, value_name = "DIR")]
    pub counterexamples: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub struct Globals {
    pub float: bool,
    pub timing: bool,
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let config = match &cli.config {
        Some(p) => Config::load(p).map_err(Failure::Validation)?,
        None => Config::default(),
    };
    let globals = Globals {
        float: cli.float || config.float.unwrap_or(false),
        timing: cli.timing || config.timing.unwrap_or(false),
    };
    match cli.command {
        Command::Norm(a) => commands::norm(a, &config, &globals),
        Command::Maximize(a) => commands::maximize(a, &config, &globals),
        Command::NormalForm(a) => commands::normal_form_cmd(a, &config, &globals),
        Command::Perturb(a) => commands::perturb(a, &config, &globals),
        Command::Lockin(a) => commands::lockin(a, &config, &globals),
        Command::Verify(a) => commands::verify(a, &config, &globals),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
