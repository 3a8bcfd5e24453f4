use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("rotation axis must be unit-norm (norm = {norm})")]
    NonUnitAxis { norm: f64 },
    #[error("sampling radius must be finite and non-negative (got {0})")]
    InvalidRadius(f64),
    #[error("colatitude must lie in [0, pi] (got {0} rad)")]
    InvalidColatitude(f64),
    #[error("source-to-viewpoint distance must be positive (got {0} mm)")]
    InvalidSourceDistance(f64),
    #[error("invalid camera model: {0}")]
    InvalidCamera(&'static str),
    #[error("point has non-positive depth {depth} mm along the principal ray")]
    BehindSource { depth: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnatomyError {
    #[error("landmark configuration is degenerate: {0}")]
    DegenerateLandmarks(&'static str),
    #[error("missing landmark `{0}`")]
    MissingLandmark(String),
    #[error("expected 16 landmarks, found {0}")]
    LandmarkCount(usize),
    #[error("corridor `{0}` is not a ramus corridor")]
    NotRamus(String),
    #[error("corridor `{0}` has zero length")]
    ZeroLengthCorridor(String),
    #[error("corridor `{0}` has non-positive radius")]
    InvalidRadius(String),
    #[error("corridor set must contain each of the 8 ids exactly once: {0}")]
    CorridorSet(String),
    #[error("invalid pelvis parameters: {0}")]
    InvalidParams(String),
    #[error("anatomy schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error(transparent)]
    Json(#[from] JsonError),
}

/// Wrapper so that JSON errors can be compared and cloned in tests.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message}")]
pub struct JsonError {
    pub message: String,
}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        JsonError {
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    /// `line` is 1-based when the parser could place the error.
    #[error("config parse error: {message}")]
    Parse { line: Option<usize>, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("sequence is finished; no further frames can be stepped")]
    Finished,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Anatomy(#[from] AnatomyError),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: schema version {found} is not supported (expected {expected})")]
    SchemaVersion {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("invalid label vector: {0}")]
    LabelVector(String),
    #[error("manifest mismatch: {0}")]
    Manifest(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognizeError {
    #[error("cannot fit a decoder on an empty corpus")]
    EmptyCorpus,
    #[error("prediction/truth length mismatch ({predictions} vs {truth})")]
    LengthMismatch { predictions: usize, truth: usize },
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("output directory {0} is not empty")]
    NotEmpty(PathBuf),
    #[error("cannot start worker pool: {0}")]
    Workers(String),
}
