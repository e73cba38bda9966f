use std::fmt;

/// Command failures split by exit code: usage problems exit 1, data and
/// processing problems exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> CliError {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<dataio::DataError> for CliError {
    fn from(e: dataio::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<models::ModelError> for CliError {
    fn from(e: models::ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<textembed::TextError> for CliError {
    fn from(e: textembed::TextError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<evalx::EvalError> for CliError {
    fn from(e: evalx::EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}
