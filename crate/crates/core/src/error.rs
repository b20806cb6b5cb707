use thiserror::Error;

use crate::resource::ResourceKind;

#[derive(Debug, Error)]
pub enum PeprError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnitRange { name: &'static str, value: f64 },

    #[error("alpha must be >= 1, got {0}")]
    InvalidAlpha(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("record `{model_id}` has no value for resource {kind}")]
    MissingResource {
        kind: ResourceKind,
        model_id: String,
    },

    #[error("no normalization context for resource {0}")]
    MissingContext(ResourceKind),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("invalid bounds: lower {lo} exceeds upper {hi}")]
    InvalidBounds { lo: f64, hi: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("{value} is outside the sampled range [{lo}, {hi}]")]
    OutsideSampledRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("no records")]
    NoRecords,

    #[error("underdetermined fit: {0} rows given, at least 3 are needed")]
    Underdetermined(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PeprError>;
