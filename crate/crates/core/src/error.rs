use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("division by zero at byte {offset}")]
    DivisionByZero { offset: usize },

    #[error("denominator vanishes identically")]
    DenominatorVanishes,

    #[error("denominator is not invertible modulo {p}")]
    NonInvertibleDenominator { p: u32 },

    #[error("value has a nonzero imaginary part")]
    NonRealValue,

    #[error("parameter `{0}` is not bound to a value")]
    UnboundParam(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("unknown algebra `{0}`")]
    UnknownAlgebra(String),

    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("search space of {size} points exceeds the budget of {budget}")]
    RefusedSize { size: u128, budget: u128 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
