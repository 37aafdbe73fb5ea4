use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smc_repetition_cli::{run_to_disk, CliError, Experiment, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "smcrep", version, about = "Ancestor and repetition experiments for sequential Monte Carlo samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact expected surviving-ancestor counts and transition matrices.
    Exact(Common),
    /// The bounding recursions and their convergence.
    Recursion(Common),
    /// Monte Carlo surviving-ancestor counts for random diagrams.
    Simulate(Common),
    /// Mean level at which one ancestor covers a share of the final sample.
    Ftable(Common),
    /// The sequential graph partitioner with repetition statistics.
    Minismc(Common),
    /// Scaled error of controlled-repetition samples across sample sizes.
    Crs(Common),
    /// Runs the experiment named by `experiment = ...` in the config file.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trials, runs or replications, depending on the experiment.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `grid:RxC` or the path of an edge list.
    #[arg(long)]
    graph: Option<String>,
    /// Overrides one setting; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn resolve(command: Command) -> Result<ExperimentConfig, CliError> {
    let (experiment, common) = match command {
        Command::Exact(c) => (Some(Experiment::ExactTable), c),
        Command::Recursion(c) => (Some(Experiment::RecursionTable), c),
        Command::Simulate(c) => (Some(Experiment::DiagramMc), c),
        Command::Ftable(c) => (Some(Experiment::FTable), c),
        Command::Minismc(c) => (Some(Experiment::MiniSmc), c),
        Command::Crs(c) => (Some(Experiment::CrsClt), c),
        Command::Run(c) => (None, c),
    };
    let text = match &common.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?),
        None => None,
    };
    let overrides = Overrides {
        seed: common.seed,
        trials: common.trials,
        graph: common.graph,
        out: common.out,
        set: common.set,
    };
    ExperimentConfig::resolve(experiment, text.as_deref(), &overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(cli.command).and_then(|config| {
        let artifacts = run_to_disk(&config)?;
        for a in &artifacts {
            println!("{}", config.out.join(&a.name).display());
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smcrep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
