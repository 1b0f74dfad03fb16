use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or combination of values.
    #[error("config error: {0}")]
    Config(String),

    #[error("index {index} out of range (valid: 0..{len})")]
    Range { index: usize, len: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("size error: need at least {needed} samples, got {got}")]
    Size { needed: usize, got: usize },

    /// Training produced a non-finite loss.
    #[error("non-finite loss at step {step} (batch sample ids {batch:?})")]
    NanLoss { step: usize, batch: Vec<usize> },

    /// Input data is missing, malformed or inconsistent.
    #[error("data error: {0}")]
    Data(String),

    #[error("stream error: {0}")]
    Stream(String),

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
