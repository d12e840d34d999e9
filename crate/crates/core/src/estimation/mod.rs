//! Objective functions, parameter fitting and Thomas sensitivities.

pub mod fit;
pub mod objective;
pub mod sensitivity;
pub mod simplex;

pub use fit::{assess, fit, fit_fixed_qm, Bounds, FitResult, FitStatistics, ModelSpec};
pub use objective::{hfe, r_squared, rsse, ObjectiveValue, RELATIVE_EPSILON};
pub use sensitivity::{sensitivity_kt, sensitivity_profile, sensitivity_qm, SensitivityProfile};
