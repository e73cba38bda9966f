use thiserror::Error;

/// Errors raised by array construction, kernel shape checks, and graph
/// traversal.
#[derive(Debug, Error)]
pub enum NumericError {
    #[error("dimension error on {axis}: {detail}")]
    Dimension { axis: String, detail: String },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl NumericError {
    pub fn dimension(axis: impl Into<String>, detail: impl Into<String>) -> Self {
        NumericError::Dimension {
            axis: axis.into(),
            detail: detail.into(),
        }
    }

    pub fn empty(what: impl Into<String>) -> Self {
        NumericError::EmptyInput(what.into())
    }

    pub fn argument(detail: impl Into<String>) -> Self {
        NumericError::Argument(detail.into())
    }
}
