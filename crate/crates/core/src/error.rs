use thiserror::Error;

/// Errors raised by constructors, solvers and metrics.
///
/// Numeric context is reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frequency density is not symmetric about zero (mismatch {0:e})")]
    AsymmetricDensity(f64),

    #[error("total mass {0} differs from one")]
    NonUnitMass(f64),

    #[error("support is unbounded or exceeds the declared radius ({0})")]
    UnboundedSupport(String),

    #[error("negative density value {value} at index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("level {level} exceeds fiber mass {mass}")]
    EmptyLevelSet { level: f64, mass: f64 },

    #[error("measure has no mass above the floor")]
    EmptyMeasure,

    #[error("step too large: |dtheta/dt| * dt = {0} exceeds pi/4")]
    UnstableStep(f64),

    #[error("frequency density vanishes at the origin")]
    ZeroDensityAtOrigin,

    #[error("coupling {coupling} does not exceed threshold {threshold}")]
    CouplingTooWeak { coupling: f64, threshold: f64 },

    #[error("quantiles crossed in fiber {fiber} at sample {sample}")]
    MonotonicityLoss { fiber: usize, sample: usize },

    #[error("phase {value} left (0, 2pi) in fiber {fiber}")]
    SupportEscape { fiber: usize, value: f64 },

    #[error("CFL number {0} exceeds the limit")]
    CflViolation(f64),

    #[error("lattices differ: {0}")]
    LatticeMismatch(String),

    #[error("empirical measures are not comparable: {0}")]
    UnequalSupport(String),

    #[error("field mean {0:e} is not zero")]
    MeanNotZero(f64),

    #[error("field value {0} violates |phi| < pi/2")]
    RangeViolation(f64),

    #[error("series has a non-positive value {0} inside the fit window")]
    NonPositiveValues(f64),

    #[error("fit window holds {0} samples, at least 5 are required")]
    InsufficientSamples(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
