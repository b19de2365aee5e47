//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong while building or evaluating model objects.
#[derive(Debug, Clone, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("a space must contain at least one point")]
    EmptySpace,

    #[error("duplicate label `{0}` in space")]
    DuplicateLabel(String),

    #[error("index {index} out of range for space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("total measure is zero; the normalized class is undefined")]
    ZeroTotalMeasure,

    #[error("invalid weight at index {index}: {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("bad convex weights: {0}")]
    BadConvexWeights(String),

    #[error("kernel column {column} sums to {sum:.17}, expected 1")]
    NotNormalized { column: usize, sum: f64 },

    #[error("kernel entry at row {row}, column {column} is {value}, outside [0, 1]")]
    EntryOutOfRange {
        row: usize,
        column: usize,
        value: f64,
    },

    #[error("experiment oracle is not affine: residual {residual:.3e} exceeds {bound:.3e}")]
    OracleNotAffine { residual: f64, bound: f64 },

    #[error("experiment oracle is not normalized: {0}")]
    OracleNotNormalized(String),

    #[error("point map sends index {from} to {to}, outside the outcome space of size {size}")]
    InvalidMap { from: usize, to: usize, size: usize },

    #[error("not a declared product space: {0}")]
    NotProductSpace(String),

    #[error("not a bijection: {0}")]
    NotBijective(String),

    #[error("conditioning event has probability {probability:.3e}, at or below the floor")]
    ZeroProbabilityEvent { probability: f64 },

    #[error("bad convex relation: {0}")]
    BadRelation(String),

    #[error("extended observable is not pre-linear: {0}")]
    NotPrelinear(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("outcome `{outcome}` carries {count} Kraus operators; exactly one is required here")]
    MultiKrausUnsupported { outcome: String, count: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("check failed: {0}")]
    CheckFailure(String),
}
