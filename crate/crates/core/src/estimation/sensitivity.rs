//! Analytic sensitivities of the Thomas ratio to its two parameters.
//!
//! With `z = K_T·q_m·CT − K_T·C0·t`:
//!
//! ```text
//! ∂Y/∂K_T = (C0·t − q_m·CT) · e^z / (1 + e^z)²      [g·hr/L]
//! ∂Y/∂q_m = −K_T·CT · e^z / (1 + e^z)²               [L/g]
//! ```

use crate::error::{Error, Result};
use crate::models::{logistic_slope, thomas_forward, ThomasParams};
use crate::units::ExperimentConditions;

/// Maximum tolerated deviation between analytic and finite-difference
/// sensitivities in an emitted profile.
pub const FD_CHECK_LIMIT: f64 = 1e-5;
/// Relative step of the internal central-difference check.
const FD_STEP: f64 = 1e-6;
/// Deviations are measured against at least this fraction of the series peak.
const FD_SCALE_FLOOR: f64 = 1e-3;

pub fn sensitivity_kt(p: &ThomasParams, cond: &ExperimentConditions, t: f64) -> f64 {
    let z = p.exponent(cond, t);
    (cond.c0() * t - p.qm() * cond.contact_time()) * logistic_slope(z)
}

pub fn sensitivity_qm(p: &ThomasParams, cond: &ExperimentConditions, t: f64) -> f64 {
    let z = p.exponent(cond, t);
    -p.kt() * cond.contact_time() * logistic_slope(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityProfile {
    pub times: Vec<f64>,
    pub d_kt: Vec<f64>,
    pub d_qm: Vec<f64>,
    /// Largest relative deviation from a central finite difference.
    pub fd_check: f64,
}

fn max_deviation(analytic: &[f64], numeric: &[f64]) -> f64 {
    let peak = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(FD_SCALE_FLOOR * peak))
        .fold(0.0, f64::max)
}

/// Both sensitivities over `times`, self-checked against central differences.
pub fn sensitivity_profile(
    p: &ThomasParams,
    cond: &ExperimentConditions,
    times: &[f64],
) -> Result<SensitivityProfile> {
    let d_kt: Vec<f64> = times.iter().map(|&t| sensitivity_kt(p, cond, t)).collect();
    let d_qm: Vec<f64> = times.iter().map(|&t| sensitivity_qm(p, cond, t)).collect();

    let hk = FD_STEP * p.kt();
    let hq = FD_STEP * p.qm();
    let kt_plus = ThomasParams::new(p.kt() + hk, p.qm())?;
    let kt_minus = ThomasParams::new(p.kt() - hk, p.qm())?;
    let qm_plus = ThomasParams::new(p.kt(), p.qm() + hq)?;
    let qm_minus = ThomasParams::new(p.kt(), p.qm() - hq)?;
    let fd_kt: Vec<f64> = times
        .iter()
        .map(|&t| {
            (thomas_forward(&kt_plus, cond, t) - thomas_forward(&kt_minus, cond, t)) / (2.0 * hk)
        })
        .collect();
    let fd_qm: Vec<f64> = times
        .iter()
        .map(|&t| {
            (thomas_forward(&qm_plus, cond, t) - thomas_forward(&qm_minus, cond, t)) / (2.0 * hq)
        })
        .collect();

    let fd_check = max_deviation(&d_kt, &fd_kt).max(max_deviation(&d_qm, &fd_qm));
    if fd_check.is_nan() || fd_check >= FD_CHECK_LIMIT {
        return Err(Error::SensitivityCheck(fd_check));
    }
    Ok(SensitivityProfile {
        times: times.to_vec(),
        d_kt,
        d_qm,
        fd_check,
    })
}
