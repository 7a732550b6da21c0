use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Malformed config file or flag value, or a parameter that fails validation.
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ofdm_bitload_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid sweep: {0}")]
    Sweep(&'static str),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> SimError {
        SimError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
