use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
}

impl TextError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        TextError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        TextError::Parse {
            path: path.into(),
            detail: detail.into(),
        }
    }
}
