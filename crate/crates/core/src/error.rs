use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient terms: need {needed}, have {available}")]
    InsufficientTerms { needed: usize, available: usize },

    #[error("sequence is not positive definite at order {order}")]
    NotPositiveDefinite { order: usize },

    #[error("sequence is not positive: {0}")]
    NotPositive(String),

    #[error("precision loss at depth {depth}: relative discrepancy {discrepancy:e}")]
    PrecisionLoss { depth: usize, discrepancy: f64 },

    #[error("spectral parameter must have nonzero imaginary part")]
    RealLambda,

    #[error("degenerate circle: {0}")]
    Degenerate(String),

    #[error("pole: denominator vanishes")]
    Pole,

    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("at least {needed} specified indices are required, found {found}")]
    TooFewIndices { needed: usize, found: usize },

    #[error("atom {atom} is negative and has no real even root")]
    NegativeAtomEvenRoot { atom: String },

    #[error("atom at zero cannot carry weight under a positive shift")]
    AtomAtZero,

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}
