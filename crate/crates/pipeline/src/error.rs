use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("missing checkpoint: {}", .0.display())]
    MissingCheckpoint(PathBuf),

    #[error("checkpoint {}: {reason}", .path.display())]
    Checkpoint { path: PathBuf, reason: String },

    #[error(transparent)]
    Core(#[from] fptc_core::Error),

    #[error(transparent)]
    Network(#[from] fptc_nn::Error),

    #[error("io error at {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report output {}: {reason}", .path.display())]
    Report { path: PathBuf, reason: String },
}

impl Error {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { key: key.into(), reason: reason.into() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn report(path: &Path, reason: impl ToString) -> Self {
        Error::Report { path: path.to_path_buf(), reason: reason.to_string() }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::MissingCheckpoint(_) => "missing_checkpoint",
            Error::Checkpoint { .. } => "checkpoint",
            Error::Core(e) => match e {
                fptc_core::Error::Ingest { .. } => "ingest",
                fptc_core::Error::Capacity { .. } => "capacity",
                fptc_core::Error::Numerical { .. } => "numerical",
                fptc_core::Error::Generation(_) => "generation",
                fptc_core::Error::Io { .. } => "io",
                _ => "validation",
            },
            Error::Network(_) => "validation",
            Error::Io { .. } => "io",
            Error::Report { .. } => "report",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
