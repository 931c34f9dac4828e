use thiserror::Error;

/// Errors raised by the ranking toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EplError {
    #[error("not a permutation of 1..{k}: {detail}")]
    InvalidPermutation { k: usize, detail: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("K = {k} exceeds the enumeration limit of {limit}")]
    EnumerationLimit { k: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, EplError>;
