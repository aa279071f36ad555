use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{what} is not contained in {within} (relative residual {residual:.3e})")]
    Containment { what: String, within: String, residual: f64 },
    #[error("unknown pair id `{0}`")]
    UnknownPair(String),
    #[error("parameter constraint violated for {id}: {message}")]
    Constraint { id: String, message: String },
    #[error("pair {0} has no desk-scale model")]
    Excluded(String),
    #[error("involution error: {0}")]
    Involution(String),
    #[error("structural error: {0}")]
    Structure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
