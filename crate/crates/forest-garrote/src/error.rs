use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by data loading, model fitting and artifact I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV parse error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("target column `{0}` not found")]
    MissingTarget(String),

    #[error("target column `{0}` is not numeric")]
    NonNumericTarget(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rule is not in canonical one-sided form (variable {0} bounded on both sides)")]
    NonCanonicalRule(usize),

    #[error("no out-of-bag predictions available (too few trees?)")]
    NoOobPredictions,

    #[error("nothing to select: the design has no active groups")]
    EmptyDesign,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { expected: u32, found: u32 },

    #[error("artifact kind mismatch: expected `{expected}`, found `{found}`")]
    ArtifactKind { expected: String, found: String },

    #[error("pattern {0} from the model is absent from the supplied groups")]
    UnknownPattern(String),

    #[error("dataset `{0}` is not in the cache and could not be fetched")]
    DatasetUnavailable(String),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
