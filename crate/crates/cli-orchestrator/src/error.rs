use lfpp_field::FieldError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const CHECKS_FAILED: i32 = 2;
    pub const VERIFY: i32 = 3;
    pub const BUDGET: i32 = 4;
    pub const USAGE: i32 = 5;
    pub const RUNTIME: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget refused: {0}")]
    Budget(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Config(_) => exit::CONFIG,
            CliError::Budget(_) => exit::BUDGET,
            CliError::Verify(_) => exit::VERIFY,
            CliError::Runtime(_) => exit::RUNTIME,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Config(m) | FieldError::Domain(m) => CliError::Config(m),
            FieldError::Budget(m) => CliError::Budget(m),
            FieldError::State(m) | FieldError::Io(m) => CliError::Runtime(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
