//! Command-line experiment runner: configuration, execution and output.

pub mod config;
mod error;
pub mod output;
pub mod run;

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use error::CliError;
pub use output::Artifact;

/// Resolves, runs and writes one experiment. Nothing is written unless the
/// whole run succeeds.
pub fn run_to_disk(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let artifacts = run::execute(config)?;
    output::write_artifacts(&config.out, &artifacts)?;
    Ok(artifacts)
}
