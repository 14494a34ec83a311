use thiserror::Error;

/// Errors produced by the solver and its diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty geometry")]
    EmptyGeometry,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("open contour where a closed contour is required")]
    OpenContour,

    #[error("kernel singularity: parameter m = {0} is outside [0, 1)")]
    KernelSingularity(f64),

    #[error("outside interior case: |z0| = {0}")]
    OutsideInteriorCase(f64),

    #[error("outside exterior case: |z0| = {0}")]
    OutsideExteriorCase(f64),

    #[error("coincident source and target")]
    CoincidentPoints,

    #[error("step rejected (self-intersection); retry with dt = {suggested_dt}")]
    StepRejected { suggested_dt: f64 },

    #[error("resolution exhausted: {0}")]
    ResolutionExhausted(String),

    #[error("shift tracking lost at t = {t}: {reason}")]
    ShiftTrackingLost { t: f64, reason: String },

    #[error("time {t} outside history span [{start}, {end}]")]
    OutsideHistory { t: f64, start: f64, end: f64 },

    #[error("path is not on the symmetry axis")]
    OffAxisPath,

    #[error("trajectory could not be classified: {0}")]
    Unclassified(String),

    #[error("patch gradients are distributional")]
    PatchGradient,

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
