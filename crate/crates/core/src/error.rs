use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the domain of a model formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The cell configuration or scenario table is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// A solver or root finder could not produce a trustworthy result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the configuration rather than by numerics or I/O.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Domain(_) | Error::Parse { .. })
    }
}
