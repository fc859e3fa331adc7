use thiserror::Error;

/// Errors produced by the ranking, estimation and sampling routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("row {row} has {missing} missing entries; augmentation supports at most {limit} (use MCEM instead)")]
    AugmentationCapacity {
        row: usize,
        missing: usize,
        limit: usize,
    },

    #[error("partial rankings are not supported here (row {row}); use a partial-data fitter")]
    PartialData { row: usize },

    #[error("empty data set")]
    EmptyData,

    #[error("every start produced a degenerate (empty) component")]
    AllStartsDegenerate,

    #[error("exact sampling requires n <= {limit}, got n = {n}")]
    ExactSamplingLimit { n: usize, limit: usize },

    #[error("rejection sampling of separated consensus rankings failed after {0} attempts")]
    SeparationBudget(usize),

    #[error("table error: {0}")]
    Table(String),

    #[error("csv error at row {row}, column {col}: {msg}")]
    Csv { row: usize, col: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
