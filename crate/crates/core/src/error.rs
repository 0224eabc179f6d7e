use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the laboratory.
///
/// Every variant maps onto a process exit code through [`Error::exit_code`],
/// so the CLI can report failures by category.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its declared constraint.
    #[error("configuration error: `{key}` {constraint}")]
    Config { key: String, constraint: String },

    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was invoked in a way its contract forbids.
    #[error("usage error: {0}")]
    Usage(String),

    /// Input records are incomplete for the requested calculation.
    #[error("data error: {0}")]
    Data(String),

    /// Two routes that must agree did not.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// A precondition of a state transition was not met.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            constraint: constraint.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Category-coded process exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Config { .. } | Error::Parse { .. } => 3,
            Error::Domain(_) | Error::Data(_) | Error::Precondition(_) => 4,
            Error::Consistency(_) => 5,
            Error::Io { .. } => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
