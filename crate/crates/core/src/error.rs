use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("iteration cap of {cap} exceeded: {context}")]
    IterationCap { cap: u64, context: String },

    /// A particle could not extend its partial plan within the redraw cap.
    #[error("bottleneck at level {level}: {detail}")]
    Bottleneck { level: usize, detail: String },

    /// Exhaustive enumeration refused because the instance is too large.
    #[error("instance too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
