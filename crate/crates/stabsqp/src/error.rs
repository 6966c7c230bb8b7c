use thiserror::Error;

/// Errors surfaced by construction and evaluation routines.
///
/// Solver outcomes (max iterations, infeasible subproblems, ...) are reported
/// through status enums, not through this type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gram operator must be symmetric positive definite")]
    NotPositiveDefinite,

    #[error("dense gram operator is not compatible with a coordinatewise-separable set")]
    UnsupportedGram,

    #[error("set variant is not supported by this operation")]
    UnsupportedSet,

    #[error("vector contains a non-finite coefficient at index {0}")]
    NonFinite(usize),

    #[error("box bounds are inconsistent at coordinate {0} (lower > upper)")]
    InvalidBounds(usize),

    #[error("ball radius must be nonnegative")]
    NegativeRadius,

    #[error("product blocks must have positive dimension")]
    EmptyBlock,

    #[error("subproblem must be built away from a KKT point (sigma(v) = 0)")]
    AtKktPoint,

    #[error("active-set enumeration is intractable for constraint dimension {0} (limit 12)")]
    TooLarge(usize),

    #[error("grid size {0} is too small (need at least 4)")]
    BadGrid(usize),

    #[error("regularization weight must be positive, got {0}")]
    BadAlpha(f64),

    #[error("not enough usable iterations to estimate a convergence order")]
    InsufficientData,

    #[error("instance has no cached reference KKT point")]
    MissingReference,

    #[error("invalid option: {0}")]
    InvalidOption(String),
}

pub type Result<T> = std::result::Result<T, Error>;
