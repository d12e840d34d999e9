//! Fixed-bed ion-exchange breakthrough modeling.
//!
//! * [`units`] and [`curve`]: canonical units, experiment conditions and
//!   effluent time series.
//! * [`models`]: Thomas, Yoon–Nelson, Clark and Wolborska forward models.
//! * [`estimation`]: RSSE/HFE/R², multi-start simplex fitting, sensitivities.
//! * [`correlation`]: fixed-capacity prediction with a rate constant that is
//!   linear in contact time and inlet concentration.
//! * [`reference`]: bundled reference experiments and fits.

pub mod correlation;
pub mod curve;
pub mod error;
pub mod estimation;
pub mod models;
pub mod reference;
pub mod units;

pub use correlation::{
    average_qm, fit_line, fit_plane, predict_curve, predict_kt, Axis, CorrelationModel,
    CurvePrediction, KtPrediction, LineFit, PlaneCoefficients, SourceExperiment,
};
pub use curve::{ingest_curve, BreakthroughCurve, CurvePoint};
pub use error::{Error, Result};
pub use estimation::{
    assess, fit, fit_fixed_qm, hfe, r_squared, rsse, sensitivity_kt, sensitivity_profile,
    sensitivity_qm, Bounds, FitResult, FitStatistics, ModelSpec, SensitivityProfile,
};
pub use models::{
    breakthrough_time, clark_forward, linspace, thomas_forward, thomas_linearized,
    wolborska_forward, yoon_nelson_forward, BreakthroughTime, ClarkParams, ModelKind, ParameterSet,
    ThomasParams, WolborskaParams, YoonNelsonParams,
};
pub use units::{
    breakthrough_ratio, to_canonical, ConditionsFile, ExperimentConditions, Measured, RawConditions,
};
