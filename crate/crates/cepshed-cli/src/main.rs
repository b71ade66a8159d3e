//! Command-line front end: estimate match rates, compute shedding plans,
//! replay them against simulated streams, and verify solver guarantees.
//! Every run is deterministic given its arguments; errors print one
//! `error[<class>]: ...` line on stderr and map to a stable exit code.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use cepshed::plan::DEFAULT_RESOLUTION;

mod cmd;
mod error;
mod files;

pub(crate) const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "cepshed",
    version,
    about = "Load shedding for complex event processing: estimate, plan, simulate, verify"
)]
struct Cli {
    /// Reserved for parallel evaluation; accepted for compatibility.
    /// Results never depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fill in missing expected match rates in a workload file
    Estimate(EstimateArgs),
    /// Compute a shedding plan for a workload
    Plan(PlanArgs),
    /// Replay a plan against simulated streams and report realized metrics
    Simulate(SimulateArgs),
    /// Check solver guarantees against independent references
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
pub struct EstimateArgs {
    /// Workload file whose queries may lack expected_matches
    #[arg(long)]
    pub workload: PathBuf,
    /// Observation span backing the estimates, in stream time units
    #[arg(long, default_value_t = 1000.0)]
    pub duration: f64,
    /// Stream seed for sampled estimates
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the completed workload here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct PlanArgs {
    /// Workload file with every expected_matches present
    #[arg(long)]
    pub workload: PathBuf,
    /// Which shedding problem to solve
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    /// Solver to run; each variant has a default
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Per-query loss threshold for bicriteria and tricriteria rounding
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Accuracy knob for the approximation scheme
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Grid order for the fractional sweep
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Discretization step for the dynamic programs
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: f64,
    /// Write the plan here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    /// Workload file the plan was computed for
    #[arg(long)]
    pub workload: PathBuf,
    /// Plan file to replay
    #[arg(long)]
    pub plan: PathBuf,
    /// Duration of each simulated stream, in stream time units
    #[arg(long, default_value_t = 1000.0)]
    pub duration: f64,
    /// Independent streams to average over
    #[arg(long, default_value_t = 30)]
    pub trials: u32,
    /// Base seed; trial t runs on a stream derived from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report format
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct VerifyArgs {
    /// Check solvers on this workload
    #[arg(long)]
    pub workload: Option<PathBuf>,
    /// Check solvers on this many random whole-number instances instead
    #[arg(long, value_name = "N")]
    pub random: Option<u32>,
    /// Cap on event types per random instance
    #[arg(long, default_value_t = 10)]
    pub max_types: usize,
    /// Loss thresholds to sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub tau: Vec<f64>,
    /// Approximation-scheme accuracies to sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub eps: Vec<f64>,
    /// Grid orders to sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub k: Vec<usize>,
    /// Discretization step for non-whole-number workloads
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: f64,
    /// Seed for the random sweep
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output format
    #[arg(long, value_enum, default_value_t = TableFormat::Table)]
    pub format: TableFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Imls,
    Fmls,
    Icls,
    Fcls,
    Idls,
    Fdls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
}

fn main() {
    std::process::exit(run_cli());
}

fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    let first = first.strip_prefix("error: ").unwrap_or(first);
                    eprintln!("error[usage]: {first}");
                    1
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Estimate(args) => cmd::estimate::run(args),
        Command::Plan(args) => cmd::plan::run(args),
        Command::Simulate(args) => cmd::simulate::run(args),
        Command::Verify(args) => cmd::verify::run(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
