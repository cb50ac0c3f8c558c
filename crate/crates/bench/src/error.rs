use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] aoplan::Error),

    #[error("{0}")]
    Usage(String),

    #[error("cannot access `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub fn usage(msg: impl Into<String>) -> Self {
        BenchError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for bad input, 3 for I/O trouble. (1 is reserved
    /// for runs that complete without finding a path.)
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Io { .. } => 3,
            BenchError::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 3,
            BenchError::Core(aoplan::Error::Saturation { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
