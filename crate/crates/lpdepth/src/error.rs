//! Crate-wide error type.

use thiserror::Error;

/// Coarse error classification, used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Caller misuse: bad arguments, incompatible inputs, bad configuration.
    Config,
    /// Malformed or unusable input data.
    Data,
    /// Numerically degenerate situation detected during computation.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent p must be a finite value >= 1, got {p}")]
    InvalidExponent { p: f64 },

    #[error("empty input vector")]
    EmptyVector,

    #[error("dimension must be at least 1")]
    InvalidDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("transform matrix is singular (|det| = {det:e})")]
    SingularTransform { det: f64 },

    #[error("depth value {delta} outside (0, 1]")]
    InvalidDepth { delta: f64 },

    #[error("density-from-depth identity is singular at depth 1 in dimension {dim}")]
    DepthSingularity { dim: usize },

    #[error("insufficient data: need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("degenerate sample: too few distinct values")]
    DegenerateSample,

    #[error("no usable nonsingular point subset found in {tries} tries")]
    DegenerateGeometry { tries: usize },

    #[error("trimming retained only {retained} points; need at least {needed}")]
    TrimTooAggressive { retained: usize, needed: usize },

    #[error("invalid exponent grid: {0}")]
    InvalidGrid(String),

    #[error("invalid trim levels: {0}")]
    InvalidTrim(String),

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("regret ratio undefined: reference rate {reference} does not exceed Bayes risk {bayes}")]
    UndefinedRegret { reference: f64, bayes: f64 },

    #[error("{path}: {message}")]
    DataFormat { path: String, message: String },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("model format version {got} unsupported (this build reads version {expected})")]
    ModelVersion { expected: u32, got: u32 },

    #[error("operation requires d = 2, got d = {dim}")]
    UnsupportedDimension { dim: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Which exit-code class this error belongs to.
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidExponent { .. }
            | EmptyVector
            | InvalidDimension
            | DimensionMismatch { .. }
            | InvalidDepth { .. }
            | InvalidGrid(_)
            | InvalidTrim(_)
            | InvalidPriors(_)
            | ModelFormat(_)
            | ModelVersion { .. }
            | UnsupportedDimension { .. }
            | Config(_) => ErrorClass::Config,
            DataFormat { .. } | Io(_) | InsufficientData { .. } => ErrorClass::Data,
            SingularTransform { .. }
            | DepthSingularity { .. }
            | DegenerateData(_)
            | DegenerateSample
            | DegenerateGeometry { .. }
            | TrimTooAggressive { .. }
            | UndefinedRegret { .. } => ErrorClass::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
