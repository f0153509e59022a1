use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported dimension m = {0}")]
    UnsupportedDimension(usize),

    #[error("multivector is numerically singular (condition number {condition:e})")]
    SingularMultivector { condition: f64 },

    #[error("not a structural set: max deviation {deviation:e} from orthonormality")]
    NotStructural { deviation: f64 },

    #[error("point lies within {distance:e} of the kernel singularity")]
    OriginSingularity { distance: f64 },

    #[error("dimension m = {0} is odd; the swapped-pair construction needs even m")]
    OddDimension(usize),

    #[error("evaluation point is {distance:e} from the boundary, inside the {collar:e} collar")]
    TooCloseToBoundary { distance: f64, collar: f64 },

    #[error("hypothesis violated: alpha = {alpha} must exceed d/m = {bound}")]
    HypothesisViolated { alpha: f64, bound: f64 },

    #[error("constant {name} is not invertible: {reason}")]
    NonInvertibleConstant { name: &'static str, reason: String },

    #[error("radius {tau:e} is below mesh resolution {resolution:e}")]
    BelowResolution { tau: f64, resolution: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point lies on the boundary; use the jet directly")]
    OnBoundary,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("{0}")]
    Invalid(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
