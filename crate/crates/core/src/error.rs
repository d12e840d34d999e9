use thiserror::Error;

/// Errors produced by the breakthrough-curve toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown unit `{unit}` for field `{field}`")]
    UnknownUnit { field: &'static str, unit: String },

    #[error("invalid conditions: {0}")]
    InvalidConditions(String),

    #[error("missing field `{0}`")]
    MissingField(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("time not increasing at row {row}")]
    NonMonotoneTime { row: usize },

    #[error("ratio {value} outside [0, 1] at row {row}")]
    RatioOutOfRange { row: usize, value: f64 },

    #[error("need at least {required} points, found {found}")]
    TooFewPoints { found: usize, required: usize },

    #[error("inlet already below limit")]
    InletBelowLimit,

    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("target ratio {0} must lie strictly between 0 and 1")]
    InvalidTarget(f64),

    #[error("no linearizable points")]
    NoLinearizablePoints,

    #[error("objective undefined on this curve")]
    ObjectiveUndefined,

    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("{n} points cannot support {p} parameters")]
    TooFewForParameters { n: usize, p: usize },

    #[error("R² undefined: experimental series is constant")]
    RSquaredUndefined,

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("correlation extrapolated past validity (K_T = {0})")]
    Extrapolation(f64),

    #[error("finite-difference check failed: deviation {0:e}")]
    SensitivityCheck(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
