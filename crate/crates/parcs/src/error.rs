use crate::profiles::Scenario;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("scenario mismatch: expected {expected:?}, found {found:?}")]
    ScenarioMismatch { expected: Scenario, found: Scenario },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("infeasible sparsity caps: {0}")]
    InfeasibleCaps(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("iteration budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("combinatorial guard exceeded: {0}")]
    GuardExceeded(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
