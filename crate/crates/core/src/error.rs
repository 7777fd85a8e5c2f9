use thiserror::Error;

/// Errors raised anywhere in the Morse-complex pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum MorseError {
    #[error("point {0:?} lies outside the manifold")]
    PointOutsideManifold(Vec<f64>),
    #[error("point {0:?} has two boundary constraints active (corner)")]
    AmbiguousBoundary(Vec<f64>),
    #[error("point {0:?} is not on the boundary")]
    NotOnBoundary(Vec<f64>),
    #[error("function is not Morse at {point:?}: {clause}")]
    NotMorse { point: Vec<f64>, clause: String },
    #[error("degenerate critical point at {0:?}")]
    DegenerateCritical(Vec<f64>),
    #[error("boundary critical point at {0:?} has undetermined type (df vanishes on the boundary)")]
    TypeUndetermined(Vec<f64>),
    #[error("pseudo-gradient certification failed after radius halving: {0}")]
    BlendGapFailure(String),
    #[error("trajectory left the manifold at {0:?}")]
    CertificateViolation(Vec<f64>),
    #[error("trajectory timed out at {0:?}")]
    Timeout(Vec<f64>),
    #[error("non-transverse connection: {0}")]
    NonTransverse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("boundary square nonzero between {from} and {to}")]
    BoundarySquareNonzero { from: usize, to: usize },
    #[error("polynomial difference not divisible by (1+T)")]
    NotDivisible,
    #[error("negative coefficient in Morse quotient")]
    NegativeCoefficient,
    #[error("invariance failure: {0}")]
    InvarianceFailure(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("invalid tolerance override: {0}")]
    InvalidOverride(String),
}

pub type Result<T, E = MorseError> = std::result::Result<T, E>;
