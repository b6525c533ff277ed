use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("invalid error threshold: {0}")]
    InvalidThreshold(String),
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDims { width: u32, height: u32 },
    #[error("inlier ({x}, {y}) outside {width}x{height} image")]
    OutOfBounds { x: u32, y: u32, width: u32, height: u32 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid feature set: {0}")]
    InvalidFeatureSet(String),
    #[error("record {query_id}#{rank} lacks feature `{feature}`")]
    MissingFeature { query_id: String, rank: u32, feature: &'static str },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training data contains a single label class")]
    SingleClassData,
    #[error("no positive labels; precision-recall is undefined")]
    NoPositives,
    #[error("curve has fewer than two points")]
    DegenerateCurve,
    #[error("record {query_id}#{rank} has no ground-truth pose")]
    MissingGroundTruth { query_id: String, rank: u32 },
    #[error("candidate list is empty")]
    EmptyCandidates,
    #[error("need at least 2 distinct queries to split, got {0}")]
    TooFewQueries(usize),
    #[error("line {line}: field `{field}`: {message}")]
    Schema { line: usize, field: String, message: String },
    #[error("line {line}: {description}")]
    InvariantViolation { line: usize, description: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("model format: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable class name, printed by the CLI and mapped to FFI error codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidPose(_) => "InvalidPose",
            Error::InvalidThreshold(_) => "InvalidThreshold",
            Error::InvalidDims { .. } => "InvalidDims",
            Error::OutOfBounds { .. } => "OutOfBounds",
            Error::InvalidParams(_) => "InvalidParams",
            Error::InvalidFeatureSet(_) => "InvalidFeatureSet",
            Error::MissingFeature { .. } => "MissingFeature",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::EmptyDataset => "EmptyDataset",
            Error::SingleClassData => "SingleClassData",
            Error::NoPositives => "NoPositives",
            Error::DegenerateCurve => "DegenerateCurve",
            Error::MissingGroundTruth { .. } => "MissingGroundTruth",
            Error::EmptyCandidates => "EmptyCandidates",
            Error::TooFewQueries(_) => "TooFewQueries",
            Error::Schema { .. } => "SchemaError",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::ModelFormat(_) => "ModelFormat",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
