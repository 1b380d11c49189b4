//! Failures of a run and their exit codes.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config or an unmet precondition.
    Usage(String),
    /// An error raised by the toolkit.
    Toolkit(jacobi_spectral::Error),
    /// The report could not be written.
    Io(String),
}

impl CliError {
    /// 2 for usage and config errors, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Toolkit(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Toolkit(e) if e.is_numerical() => write!(f, "numerical failure: {e}"),
            CliError::Toolkit(e) => write!(f, "usage error: {e}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<jacobi_spectral::Error> for CliError {
    fn from(e: jacobi_spectral::Error) -> Self {
        CliError::Toolkit(e)
    }
}
