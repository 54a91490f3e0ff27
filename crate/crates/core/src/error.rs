use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet must have at least one action")]
    EmptyAlphabet,
    #[error("duplicate action label {0:?}")]
    DuplicateLabel(String),
    #[error("action index {index} out of range for alphabet of size {k}")]
    ActionOutOfRange { index: usize, k: usize },
    #[error("unknown action label {0:?}")]
    UnknownLabel(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid probability {value} at index {index}")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities must sum to 1 (got {0})")]
    ProbabilitySum(f64),

    #[error("empty sequence has no runs")]
    EmptySequence,
    #[error("sequence too short for runs test (n = {0}, need at least 2)")]
    SequenceTooShort(usize),
    #[error("no observations")]
    NoObservations,
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("non-finite argument")]
    NonFinite,
    #[error("negative statistic {0}")]
    NegativeStatistic(f64),
    #[error("zero degrees of freedom")]
    ZeroDegreesOfFreedom,
    #[error("invalid shape parameter {0}")]
    InvalidShape(f64),
    #[error("{routine} failed to converge within {max_iter} iterations")]
    NoConvergence {
        routine: &'static str,
        max_iter: usize,
    },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("enumeration bound exceeded: {0}")]
    EnumerationBound(String),

    #[error("token {token:?} is not an integer at position {position}")]
    NotAnInteger { position: usize, token: String },
    #[error("value {value} out of range at position {position}")]
    ValueOutOfRange { position: usize, value: i64 },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid opponent: {0}")]
    InvalidOpponent(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid pseudocounts: {0}")]
    InvalidPrior(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
