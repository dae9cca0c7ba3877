use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("operands live in different quadratic fields (D = {0} vs D = {1})")]
    FieldMismatch(String, String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is a half-integer, nearest integer is ambiguous")]
    Tie(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("no repetition after {0} Gauss-map steps")]
    IterationLimit(usize),

    #[error("value does not fit: {0}")]
    Overflow(String),

    #[error("outside the asymptotic regime: {0}")]
    Regime(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
