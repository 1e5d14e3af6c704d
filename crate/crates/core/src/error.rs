use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected} samples, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid component labels: {0}")]
    InvalidLabels(String),

    #[error("label {0} is not in the index set")]
    LabelNotInIndexSet(i64),

    #[error("brute-force nonlinearity refused for {n} components (limit {limit})")]
    TooManyComponents { n: usize, limit: usize },

    #[error("iteration did not converge after {iterations} steps (last change {last_change:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        history: Vec<IterateRecord>,
    },

    #[error("iteration collapsed at step {iteration}: stabilizing factor {factor:e}")]
    Collapse {
        iteration: usize,
        factor: f64,
        history: Vec<IterateRecord>,
    },

    #[error("shooting bracket not found: {0}")]
    BracketNotFound(String),

    #[error("field is identically zero")]
    ZeroField,

    #[error("boost velocity ({0}, {1}) is not a multiple of 2π/L")]
    NotGridCommensurate(f64, f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fit window [{start}, {end}] contains {found} samples")]
    WindowOutOfRange { start: f64, end: f64, found: usize },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("field contains non-finite samples")]
    NonFinite,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One step of a fixed-point iteration, kept for failure reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub iteration: usize,
    pub factor: f64,
    pub change: f64,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
