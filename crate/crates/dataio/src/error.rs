use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("study {study_id}: {detail}")]
    Load { study_id: String, detail: String },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl DataError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        DataError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        DataError::Parse {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub fn load(study_id: impl Into<String>, detail: impl Into<String>) -> Self {
        DataError::Load {
            study_id: study_id.into(),
            detail: detail.into(),
        }
    }
}
