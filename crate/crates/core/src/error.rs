use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants are grouped so that a caller (the CLI in particular) can map them
/// onto stable exit codes without inspecting messages.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (index out of range,
    /// mismatched dimensions, and so on).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input data was well formed but semantically invalid (duplicate
    /// concepts, a constant function where a sensitive one is required,
    /// a measurement that is not a resolution of the identity).
    #[error("validation error: {0}")]
    Validation(String),

    /// A text file could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// The one-query learning constraint failed for a concept pair, so the
    /// claimed error rate cannot be right.
    #[error(
        "overlap constraint violated for concepts {first} and {second}: \
         squared overlap {lhs} exceeds {rhs}"
    )]
    OverlapViolation {
        first: usize,
        second: usize,
        lhs: f64,
        rhs: f64,
    },

    /// A queried bit pattern does not belong to any concept in the class.
    #[error("observed pattern {0} matches no concept in the class")]
    OutsideClass(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
