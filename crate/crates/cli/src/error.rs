use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] smc_repetition::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input, 3 when the sampler could not extend its particles,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use smc_repetition::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Domain(_) | E::Parse { .. } | E::TooLarge(_)) => 2,
            CliError::Core(E::Bottleneck { .. }) => 3,
            CliError::Core(E::IterationCap { .. }) | CliError::Io { .. } => 1,
        }
    }
}
