use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("degenerate line-search direction (zero curvature)")]
    DegenerateDirection,
    #[error("budget b = {budget} exceeds pool size n = {pool}")]
    BudgetExceedsPool { budget: usize, pool: usize },
    #[error("problem too large for exhaustive search: C({n}, {b}) exceeds {limit}")]
    ProblemTooLarge { n: usize, b: usize, limit: u64 },
    #[error("empty posterior sample set")]
    EmptySampleSet,
    #[error("invalid label distribution: {0}")]
    InvalidDistribution(String),
    #[error("empty validation set")]
    EmptyValidationSet,
    #[error("model has not been trained")]
    UntrainedModel,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("pool exhausted: {0}")]
    PoolExhausted(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("empty record list")]
    EmptyRecordList,
}

pub type Result<T> = std::result::Result<T, Error>;
