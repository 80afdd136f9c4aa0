use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge: {0}")]
    Convergence(String),

    #[error("resource cap exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("invalid cut-off: {0}")]
    InvalidCutoff(String),

    #[error("degenerate cut-off: dilation sum vanishes at t = {t}")]
    DegenerateCutoff { t: f64 },

    #[error("degree {degree} exceeds the admissible maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("alpha mismatch between function and system")]
    AlphaMismatch,

    #[error("coefficients were produced by a different system ({found}, expected {expected})")]
    ProvenanceMismatch { expected: String, found: String },

    #[error("unknown node {index} at level {level}")]
    UnknownNode { level: usize, index: usize },

    #[error("level {level} is not part of this system (max {max})")]
    UnknownLevel { level: usize, max: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
