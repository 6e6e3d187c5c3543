//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown device `{0}`")]
    UnknownDevice(String),

    #[error("decision vector does not cover the scenario: {0}")]
    DecisionMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("impulse response truncated too early: {0}")]
    KernelTruncation(String),

    #[error("{path}:{line}: {msg}")]
    Csv {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("oracle instance too large: {n} requests (exhaustive limit is {limit})")]
    InstanceTooLarge { n: usize, limit: usize },

    #[error("monte carlo budget is zero")]
    ZeroMcBudget,

    #[error("infeasible at alpha = 0 ({0}); the device violates its own limits even with every request offloaded")]
    InfeasibleAtZero(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
