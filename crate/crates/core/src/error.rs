//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter tuple outside the admissible region (p range, signs, f ordering).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An operation was called outside its domain of validity (wrong N, missing
    /// hypothesis), as opposed to bad raw numbers.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition of a lemma or construction fails on the given data.
    #[error("precondition violated: {condition}: {detail}")]
    Precondition { condition: String, detail: String },

    /// Iterative solver did not reach its tolerance (bracket not found, step
    /// underflow, iteration cap).
    #[error("solver failure: {0}")]
    Solver(String),

    /// Data fed to an operation is internally inconsistent (e.g. profile and
    /// parameters from different runs).
    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    /// Degenerate function data (zero norms, non-finite entries).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn precondition(condition: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition { condition: condition.into(), detail: detail.into() }
    }
}
