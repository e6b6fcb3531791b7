use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod input;
mod manifest;
mod metrics;
mod plot;
mod run;

/// Deterministic multi-UAV formation simulator.
#[derive(Parser, Debug)]
#[command(name = "swarmsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write its trajectory, events and manifest.
    Run(RunArgs),
    /// Summarise a trajectory log as a JSON report.
    Metrics(LogArgs),
    /// Render SVG plots from a trajectory log.
    Plot(LogArgs),
}

/// Scenario selection shared by every command.
#[derive(Args, Debug, Clone, Default)]
struct ScenarioArgs {
    /// Built-in case study (1, 2 or 3).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), conflicts_with = "scenario")]
    case: Option<u8>,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Dotted-path override, e.g. `gains.rotational=0` (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Seed; defaults to the scenario's own.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "SWARMSIM_OUT", default_value = "results")]
    out: PathBuf,
    /// Agent whose nearest-teammate distance is summarised.
    #[arg(long, default_value_t = 0)]
    ref_agent: usize,
}

#[derive(Args, Debug)]
struct LogArgs {
    /// Trajectory CSV, or a run directory containing `trajectory.csv`.
    log: PathBuf,
    /// Scenario for obstacle and building geometry; defaults to the
    /// `scenario.json` written next to the log.
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory; defaults to the log's directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    ref_agent: usize,
}

/// Errors mapped onto the documented exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: missing or invalid scenario, corrupt log, bad flags.
    Invalid(anyhow::Error),
    /// The simulation itself aborted.
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.into())
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
    let result = match cli.command {
        Command::Run(args) => run::cmd_run(&args),
        Command::Metrics(args) => metrics::cmd_metrics(&args),
        Command::Plot(args) => plot::cmd_plot(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Invalid(e) | Failure::Runtime(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
