use thiserror::Error;

/// Errors raised by archivers, problems, metrics and the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoeaError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("objective vector must have at least 2 entries, found {0}")]
    TooFewObjectives(usize),

    #[error("objective value at index {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("solution {0} has not been evaluated")]
    NotEvaluated(u64),

    #[error("genome outside problem bounds at index {index}: {value} not in [{lower}, {upper}]")]
    GenomeOutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("vector lies below the ray reference point")]
    BelowReference,

    #[error("direction from the reference point is degenerate (vector equals reference)")]
    DegenerateDirection,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("problem `{0}` has no known analytic front")]
    UnsupportedFront(String),

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl MoeaError {
    /// True for errors caused by user-supplied configuration rather than a
    /// violated runtime contract.
    pub fn is_config(&self) -> bool {
        matches!(self, MoeaError::Config(_) | MoeaError::SizeGuard(_))
    }
}

pub type Result<T, E = MoeaError> = std::result::Result<T, E>;
