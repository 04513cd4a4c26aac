use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("probability {value} at pair ({row}, {col}) is outside [0, 1]")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },

    #[error("shuffle budget {0} must be even")]
    OddBudget(usize),

    #[error("shuffle budget {budget} exceeds what the blocks allow ({limit})")]
    BudgetTooLarge { budget: usize, limit: usize },

    #[error("a single-vertex set has no derangement")]
    NoDerangement,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid embedding dimension {d} for n = {n}")]
    InvalidDimension { d: usize, n: usize },

    #[error("degenerate densities: both graphs are empty or complete")]
    DegenerateDensity,

    #[error("zero variance under the alternative")]
    ZeroVariance,

    #[error("empty sample set")]
    EmptySample,

    #[error("invalid level alpha = {0}; must lie in (0, 1)")]
    InvalidLevel(f64),

    #[error("invalid seed set: {0}")]
    SeedInconsistency(String),

    #[error("cost matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list is empty")]
    EmptyFile,

    #[error("layers share no common vertices")]
    EmptyIntersection,

    #[error("{0}")]
    InvalidInput(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
