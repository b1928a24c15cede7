use std::fmt;
use std::path::Path;

/// Errors surfaced by the command-line front end, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or domain error in the inputs (exit code 2).
    Invalid(String),
    /// I/O or other failure not caused by the inputs (exit code 1).
    Internal(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Internal(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<tcell_delay::Error> for CliError {
    fn from(e: tcell_delay::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
