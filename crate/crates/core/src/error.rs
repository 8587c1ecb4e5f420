//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by configuration parsing, model construction and the
/// numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A function argument violated its precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A configuration value (or combination) is unusable.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    /// Monte Carlo validation found disagreement with the closed forms.
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
    /// I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 config error, 2 validation failure,
    /// 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::InvalidConfiguration(_) | Error::Internal(_) => 1,
            Error::ValidationFailed(_) => 2,
            Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
