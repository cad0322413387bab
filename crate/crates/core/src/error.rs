use thiserror::Error;

/// Errors raised by scoring, selection and ingestion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least 2 data points, got {0}")]
    TooFewRows(usize),
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("column {col} has {len} values, expected {expected}")]
    RaggedColumn { col: usize, len: usize, expected: usize },
    #[error("non-finite value {value} at row {row}, column {col}")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("feature index {index} out of range for {d} features")]
    FeatureOutOfRange { index: usize, d: usize },
    #[error("subset size {k} out of range 2..={n}")]
    SubsetSize { k: usize, n: usize },
    #[error("exhaustive oracle limited to {max} points, got {n}")]
    OracleTooLarge { n: usize, max: usize },
    #[error("invalid support sequence: {0}")]
    InvalidSupport(String),
    #[error("support sequence built for n={support} but feature has n={feature}")]
    SupportMismatch { support: usize, feature: usize },
    #[error("requested support length {0} is below 2")]
    SupportLength(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("feature {0} has no exact score")]
    MissingScore(usize),
    #[error("error ratios need at least 2 features, got {0}")]
    TooFewFeatures(usize),
    #[error("budget {budget} invalid for {available} available features")]
    Budget { budget: usize, available: usize },
    #[error("cannot discard {discard} of {d} features")]
    DiscardCount { discard: usize, d: usize },
    #[error("planted count {planted} exceeds {d} features")]
    Planted { planted: usize, d: usize },
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("row {row}, column {col}: cannot parse {value:?} as a number")]
    Parse { row: usize, col: usize, value: String },
    #[error("row {row}, column {col}: missing value")]
    Missing { row: usize, col: usize },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
