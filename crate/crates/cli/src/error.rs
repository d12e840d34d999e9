use breakcurve_core::Error as CoreError;
use thiserror::Error;

/// CLI failure with a stable process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input (exit 2).
    #[error("{0}")]
    Parse(String),
    /// Objective undefined on the supplied data (exit 3).
    #[error("{0}")]
    Objective(String),
    /// Wrong model kind or mixed resins (exit 4).
    #[error("{0}")]
    ModelMismatch(String),
    /// Too few or collinear experiments for a correlation (exit 5).
    #[error("{0}")]
    Degenerate(String),
    /// Correlation used outside its validity, or the inlet is already below
    /// the limit (exit 6).
    #[error("{0}")]
    Extrapolation(String),
    /// Anything else, e.g. failing to write outputs (exit 1).
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Other(_) => 1,
            Self::Parse(_) => 2,
            Self::Objective(_) => 3,
            Self::ModelMismatch(_) => 4,
            Self::Degenerate(_) => 5,
            Self::Extrapolation(_) => 6,
        }
    }

    pub fn parse(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        Self::Parse(format!("{context}: {err}"))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::UnknownUnit { .. }
            | CoreError::InvalidConditions(_)
            | CoreError::MissingField(_)
            | CoreError::Parse { .. }
            | CoreError::NonMonotoneTime { .. }
            | CoreError::RatioOutOfRange { .. }
            | CoreError::TooFewPoints { .. }
            | CoreError::InvalidParameter { .. }
            | CoreError::InvalidTarget(_)
            | CoreError::InvalidBounds(_)
            | CoreError::LengthMismatch(..)
            | CoreError::Empty(_) => Self::Parse(msg),
            CoreError::ObjectiveUndefined
            | CoreError::TooFewForParameters { .. }
            | CoreError::NoLinearizablePoints
            | CoreError::RSquaredUndefined
            | CoreError::SensitivityCheck(_) => Self::Objective(msg),
            CoreError::ModelMismatch(_) => Self::ModelMismatch(msg),
            CoreError::DegenerateDesign(_) => Self::Degenerate(msg),
            CoreError::Extrapolation(_) | CoreError::InletBelowLimit => Self::Extrapolation(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
