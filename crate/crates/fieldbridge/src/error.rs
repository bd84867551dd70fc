use std::path::PathBuf;
use std::time::Duration;

use fieldbridge_core::CoreError;

use crate::bridge::GuestError;

/// Errors surfaced by the host: guest failures, kernel errors and IO.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("guest error: {0}")]
    Guest(#[from] GuestError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("timed out after {0:?}")]
    Timeout(Duration),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Guest(_) => 3,
            Error::Core(_) | Error::Config(_) => 4,
            Error::Io { .. } | Error::Json { .. } | Error::Csv { .. } | Error::Timeout(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
