use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,

    #[error("root finder did not converge after {iterations} iterations (worst backward error {backward_error:e})")]
    NonConvergence { iterations: usize, backward_error: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("integrand returned a non-finite value at {at:?}")]
    NonFinite { at: Vec<f64> },

    #[error("not enough usable points: need {need}, have {have}")]
    TooFewPoints { need: usize, have: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
