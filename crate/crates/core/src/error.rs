use thiserror::Error;

/// Errors raised by the model, the estimators and the partition calculus.
///
/// Direction indices in messages are 1-based, matching the usual `p_1..p_d`
/// notation; everywhere else in the crate axes are 0-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex has {got} coordinates but the lattice has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },

    #[error("expected {expected} edge probabilities, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("p_{index} = {value} is outside [0, 1)")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("q = {0} must be a finite non-negative number")]
    InvalidQ(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("greedy partition failed at block {block}: {reason}")]
    PartitionInfeasible { block: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
