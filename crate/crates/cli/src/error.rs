use std::fmt;

use spd_radial::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const CONVERGENCE: i32 = 5;
    pub const NUMERICAL: i32 = 6;
}

#[derive(Debug)]
pub enum CliError {
    Io { path: String, source: std::io::Error },
    Usage(String),
    /// `location` names the line, record or argument that failed to parse.
    Parse { location: String, message: String },
    Validation(String),
    Convergence(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse { .. } => exit::PARSE,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Convergence(_) => exit::CONVERGENCE,
            CliError::Numerical(_) => exit::NUMERICAL,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError::Parse {
            location: location.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Parse { location, message } => write!(f, "parse error at {location}: {message}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Convergence(m) => write!(f, "convergence failure: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) | Error::DimensionMismatch { .. } | Error::Domain { .. } => {
                CliError::Validation(e.to_string())
            }
            Error::Convergence { .. } | Error::Optimization { .. } => CliError::Convergence(e.to_string()),
            Error::Range(_) | Error::Degenerate { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
