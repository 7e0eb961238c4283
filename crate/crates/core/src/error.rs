use thiserror::Error;

/// Errors raised by game construction and chain analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("{what} has {size} elements, exceeding the cap of {cap}")]
    Capacity { what: &'static str, size: u128, cap: u128 },

    #[error("game `{0}` has no potential attached")]
    MissingPotential(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("horizon of {horizon} steps exhausted (last value {last:.6e})")]
    Horizon { horizon: u64, last: f64 },

    #[error("invalid state set: {0}")]
    InvalidSet(String),

    #[error("chain is not reversible (max detailed-balance defect {0:.3e})")]
    NotReversible(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
