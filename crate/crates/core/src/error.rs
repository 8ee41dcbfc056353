use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability vector or joint table failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// `p_x > 0` where `q_x = 0`; the divergence is not finite.
    #[error("KL divergence undefined: p[{index}] = {p} > 0 but q[{index}] = 0")]
    DivergenceUndefined { index: usize, p: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid model family: {0}")]
    InvalidFamily(String),

    #[error("instance too large: {size} exceeds cap {cap}")]
    InstanceTooLarge { size: u64, cap: u64 },

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("observation (action {action}, outcome {outcome}) has zero likelihood under every supported model")]
    ImpossibleObservation { action: usize, outcome: usize },

    #[error("conditioning on zero-probability event: {0}")]
    ZeroProbabilityEvent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An internal identity that must hold exactly did not.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("operation requires {expected} structure")]
    WrongStructure { expected: &'static str },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
