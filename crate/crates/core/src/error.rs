use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DemixError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("haar basis requires a power-of-two dimension, got {0}")]
    NotPowerOfTwo(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("link `{link}` does not provide {capability}")]
    Capability {
        link: &'static str,
        capability: &'static str,
    },

    #[error("non-finite {quantity} at iteration {iteration}")]
    NonFinite {
        quantity: &'static str,
        iteration: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, DemixError>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(DemixError::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
