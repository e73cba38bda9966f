use std::io;
use std::path::PathBuf;

use thiserror::Error;

use numeric_core::NumericError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("record {study_id} is missing the {modality} input required by {arch}")]
    MissingModality {
        study_id: String,
        modality: &'static str,
        arch: &'static str,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed parameter file {path}: {detail}")]
    Persist { path: PathBuf, detail: String },
}

impl ModelError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        ModelError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn persist(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        ModelError::Persist {
            path: path.into(),
            detail: detail.into(),
        }
    }
}
