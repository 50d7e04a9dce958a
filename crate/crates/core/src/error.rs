use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("edge ({i},{j}) invalid for a model on {p} nodes")]
    InvalidEdge { i: usize, j: usize, p: usize },

    #[error("connected component with {size} nodes exceeds the enumeration cap of {cap}")]
    EnumerationCap { size: usize, cap: usize },

    #[error("joint enumeration over {bits} spin bits exceeds the cap of {cap}")]
    JointEnumerationCap { bits: usize, cap: usize },

    #[error("spin entries must be exactly +1 or -1")]
    InvalidSpin,

    #[error("expected {expected} sample data")]
    WrongSampleKind { expected: &'static str },

    #[error("precision matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("precision matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("bound not applicable: {0}")]
    BoundNotApplicable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ensemble kind mismatch: expected {expected}, got {got}")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("operation not defined for {0} ensembles")]
    UnsupportedKind(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
