use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("item '{id}': {reason}")]
    InvalidItem { id: String, reason: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error(
        "mixed explanation dimensions: item '{id}' is {found_w}x{found_h}, expected {expected_w}x{expected_h}"
    )]
    MixedExplanationDims {
        id: String,
        expected_w: usize,
        expected_h: usize,
        found_w: usize,
        found_h: usize,
    },

    #[error("hypothesis {index}: {reason}")]
    InvalidHypothesis { index: usize, reason: String },

    #[error("invalid hypothesis space: {0}")]
    InvalidSpace(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {class} has {count} item(s); at least 2 are needed to stratify")]
    ClassTooSmall { class: usize, count: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("target count {target} is below the {required} trained hypotheses")]
    TargetBelowTrained { target: usize, required: usize },

    #[error("teachability filter removed every training item")]
    NothingTeachable,

    #[error("item '{id}' has no explanation")]
    MissingExplanation { id: String },

    #[error("item '{id}' has neither an explanation difficulty nor an override")]
    MissingDifficulty { id: String },

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("candidate pool of {pool} is smaller than budget {budget}")]
    PoolTooSmall { pool: usize, budget: usize },

    #[error("item '{0}' appears in both the teaching and test sequences")]
    Overlap(String),

    #[error("unknown item id '{0}'")]
    UnknownId(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
