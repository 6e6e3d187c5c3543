//! CLI error type carrying the process exit code.

use std::fmt;

/// Errors surfaced to the user, split by exit code: configuration problems
/// (bad files, bad parameters, unwritable outputs) exit with 2, numeric
/// failures (infeasibility, oversized instances, grid trouble) with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<tao_core::Error> for CliError {
    fn from(e: tao_core::Error) -> Self {
        use tao_core::Error as E;
        match &e {
            E::UnknownDevice(_)
            | E::DecisionMismatch(_)
            | E::InvalidParameter { .. }
            | E::Csv { .. }
            | E::Scenario(_)
            | E::Io(_) => CliError::Config(e.to_string()),
            E::GridMismatch(_)
            | E::KernelTruncation(_)
            | E::InstanceTooLarge { .. }
            | E::ZeroMcBudget
            | E::InfeasibleAtZero(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
