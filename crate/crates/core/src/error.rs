use std::path::PathBuf;

/// Every failure the library can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("backward() needs a scalar loss, got shape {0:?}")]
    NotScalar(Vec<usize>),

    #[error("unstable configuration: {0}")]
    UnstableConfig(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("insufficient data: requested {requested} samples, {available} available")]
    InsufficientData { requested: usize, available: usize },

    #[error("degenerate range for `{0}` (max == min)")]
    DegenerateRange(String),

    #[error("reference values have zero RMS")]
    DegenerateTruth,

    #[error("baseline error must be positive, got {0}")]
    DegenerateBaseline(f64),

    #[error("transform left no valid time window")]
    EmptyResult,

    #[error("coordinate map is not monotone increasing with fixed endpoints")]
    NonMonotoneMap,

    #[error("loss became non-finite at epoch {epoch}")]
    DivergedLoss { epoch: usize },

    #[error("adversarial batch violates {0}")]
    AttackInvariant(String),

    #[error("config {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("missing run output: {0}")]
    MissingRun(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape_err(msg: impl Into<String>) -> Error {
    Error::ShapeMismatch(msg.into())
}
