use thiserror::Error;

/// Errors raised by measure, system and estimator operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("measure has zero total mass")]
    ZeroMass,
    #[error("particle measure must contain at least one particle")]
    EmptyMeasure,
    #[error("invalid weight {0}: weights must be finite and nonnegative")]
    BadWeight(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("measures live on different spaces ({0} vs {1})")]
    SpaceMismatch(String, String),
    #[error("particle {index} left the domain of space {space}")]
    MapDomain { index: usize, space: String },
    #[error("conditioning region carries no particle mass")]
    NullConditioning,
    #[error("density support is empty")]
    BadSupport,
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("discrete-time system evolved by non-integral time {0}")]
    NonIntegralTime(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("integration step {step} exceeds horizon {t}")]
    StepTooLarge { step: f64, t: f64 },
    #[error("system `{0}` has no vector field")]
    NoVectorField(String),
    #[error("unknown system id `{0}`")]
    UnknownSystem(String),
    #[error("no candidate points supplied")]
    EmptyCandidates,
    #[error("ball around center {0} has zero reference mass")]
    EmptyBall(usize),
    #[error("particle {0} lies outside every cover cell")]
    Unassigned(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
