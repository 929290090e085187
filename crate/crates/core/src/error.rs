use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A construction produced a value that fails its own defining identity.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// Input outside the domain of the operation (reducible, complex roots, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision exhausted: needed more than {max_bits} bits ({context})")]
    PrecisionExhausted { max_bits: u32, context: String },

    #[error("units are numerically dependent: {0}")]
    DependentUnits(String),

    #[error("outside the regime of the estimate: {0}")]
    OutOfRegime(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by running out of working precision or
    /// big-number capacity rather than by bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::PrecisionExhausted { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
