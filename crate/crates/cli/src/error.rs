use std::fmt;
use std::process::ExitCode;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, parameters or input data (exit 1).
    Validation(String),
    /// Unreadable or unwritable files (exit 2).
    Io(String),
    /// Numerical failure inside the solver (exit 3).
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        })
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl From<tvrelax::Error> for CliError {
    fn from(e: tvrelax::Error) -> Self {
        use tvrelax::Error::*;
        match e {
            PcgBreakdown { .. } | PoissonFailed(_) | Factorization(_) | BracketExceeded(_) => {
                CliError::Solver(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
