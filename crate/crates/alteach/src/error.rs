//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance index {index} out of range ({count} instances)")]
    InstanceOutOfRange { index: usize, count: usize },

    #[error("hypothesis index {index} out of range ({count} hypotheses)")]
    HypothesisOutOfRange { index: usize, count: usize },

    #[error("hypotheses {first} and {second} have identical label rows")]
    DuplicateHypotheses { first: usize, second: usize },

    #[error("version space is empty")]
    EmptyVersionSpace,

    #[error("no unqueried instance remains")]
    NoUnqueriedInstance,

    #[error("constraint `{kind}` requires instance features")]
    MissingFeatures { kind: String },

    #[error("non-positive cost {cost} for instance {index}")]
    NonPositiveCost { index: usize, cost: f64 },

    #[error("exact-solve cap exceeded: {0}")]
    CapExceeded(String),

    #[error("search budget exhausted: {0}")]
    SearchExhausted(String),

    #[error("undefined value: {0}")]
    Undefined(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid problem file: {0}")]
    InvalidProblem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
