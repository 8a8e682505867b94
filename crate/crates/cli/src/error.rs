use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const SOLVER: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("run diverged: {0}")]
    Diverged(String),
    #[error("solver failure: {0}")]
    Solver(mrdg_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Diverged(_) => exit::DIVERGED,
            CliError::Solver(_) => exit::SOLVER,
            CliError::Io(_) => exit::IO,
        }
    }
}

impl From<mrdg_core::Error> for CliError {
    fn from(e: mrdg_core::Error) -> Self {
        match e {
            mrdg_core::Error::Config(m) | mrdg_core::Error::Construction(m) => CliError::Config(m),
            mrdg_core::Error::Divergence { .. } => CliError::Diverged(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
