use std::path::PathBuf;

use kelly_market::MarketError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid experiment definition. Exit code 2.
    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error(transparent)]
    Market(#[from] MarketError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("{0} verification check(s) failed")]
    VerificationFailed(usize),

    #[error("{failed} of {total} batch runs failed")]
    BatchFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
