use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::RejectReason;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution or rate parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The configuration is well formed but violates the overload assumptions.
    #[error("configuration rejected: {0:?}")]
    Rejected(Vec<RejectReason>),

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("event budget of {limit} events exhausted")]
    EventBudget { limit: u64 },

    #[error("power iteration did not converge within {iterations} iterations")]
    SpectralFailure { iterations: usize },

    #[error("branching process is not supercritical (rho = {rho})")]
    NotSupercritical { rho: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
