//! Goodness-of-fit statistics on aligned ratio series.
//!
//! ```text
//! RSSE = Σ ((Y_cal − Y_exp) / Y_cal)²
//! HFE  = 100 / (n − p) · Σ (Y_cal − Y_exp)² / Y_cal      [%]
//! R²   = 1 − Σ (Y_exp − Y_cal)² / Σ (Y_exp − mean(Y_exp))²
//! ```
//!
//! Both RSSE and HFE divide by the model value, so points where
//! `Y_cal < RELATIVE_EPSILON` are left out and counted.

use crate::error::{Error, Result};

/// Model values below this are excluded from RSSE and HFE.
pub const RELATIVE_EPSILON: f64 = 1e-6;

/// An objective value together with how many points contributed to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    pub used: usize,
    pub excluded: usize,
}

fn check_aligned(calc: &[f64], exp: &[f64]) -> Result<()> {
    if calc.len() != exp.len() {
        return Err(Error::LengthMismatch(calc.len(), exp.len()));
    }
    if calc.is_empty() {
        return Err(Error::Empty("series"));
    }
    Ok(())
}

fn relative_sum(
    calc: &[f64],
    exp: &[f64],
    term: impl Fn(f64, f64) -> f64,
) -> Result<ObjectiveValue> {
    check_aligned(calc, exp)?;
    let mut value = 0.0;
    let mut used = 0;
    for (&c, &e) in calc.iter().zip(exp) {
        if c < RELATIVE_EPSILON {
            continue;
        }
        value += term(c, e);
        used += 1;
    }
    if used == 0 {
        return Err(Error::ObjectiveUndefined);
    }
    Ok(ObjectiveValue {
        value,
        used,
        excluded: calc.len() - used,
    })
}

/// Residual sum of squared relative errors.
pub fn rsse(calc: &[f64], exp: &[f64]) -> Result<ObjectiveValue> {
    relative_sum(calc, exp, |c, e| ((c - e) / c).powi(2))
}

/// Hybrid fractional error in percent, penalized by `p` parameters.
pub fn hfe(calc: &[f64], exp: &[f64], p: usize) -> Result<ObjectiveValue> {
    let sum = relative_sum(calc, exp, |c, e| (c - e).powi(2) / c)?;
    if sum.used <= p {
        return Err(Error::TooFewForParameters { n: sum.used, p });
    }
    Ok(ObjectiveValue {
        value: 100.0 / (sum.used - p) as f64 * sum.value,
        ..sum
    })
}

/// Coefficient of determination on the ratio series.
pub fn r_squared(calc: &[f64], exp: &[f64]) -> Result<f64> {
    check_aligned(calc, exp)?;
    if calc.len() < 2 {
        return Err(Error::TooFewPoints {
            found: calc.len(),
            required: 2,
        });
    }
    let mean = exp.iter().sum::<f64>() / exp.len() as f64;
    let ss_tot: f64 = exp.iter().map(|e| (e - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::RSquaredUndefined);
    }
    let ss_res: f64 = calc.iter().zip(exp).map(|(c, e)| (e - c).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// The quantity the optimizer minimizes. Identical to RSSE while every
/// point with data above the threshold is included; a model value that has
/// dropped below the threshold where data is above it is charged against
/// the threshold instead of being silently dropped, so the optimizer cannot
/// win by pushing the curve to zero over the data.
pub(crate) fn fitting_objective(calc: &[f64], exp: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&c, &e) in calc.iter().zip(exp) {
        if !c.is_finite() {
            return f64::INFINITY;
        }
        if c >= RELATIVE_EPSILON {
            total += ((c - e) / c).powi(2);
        } else if e >= RELATIVE_EPSILON {
            total += ((c - e) / RELATIVE_EPSILON).powi(2);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rsse_examples() {
        let s = [0.1, 0.4, 0.9];
        assert_eq!(rsse(&s, &s).unwrap().value, 0.0);
        let v = rsse(&[0.5, 0.5, 0.5], &[0.4, 0.5, 0.6]).unwrap();
        assert_relative_eq!(v.value, 0.08, max_relative = 1e-12);
        let v = rsse(&[1e-9, 0.5], &[0.0, 0.5]).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.excluded, 1);
        assert_eq!(
            rsse(&[1e-9, 0.0], &[0.1, 0.2]),
            Err(Error::ObjectiveUndefined)
        );
        assert!(matches!(
            rsse(&[0.1], &[0.1, 0.2]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn hfe_examples() {
        let s = [0.1, 0.4, 0.9];
        assert_eq!(hfe(&s, &s, 2).unwrap().value, 0.0);
        let v = hfe(&[0.5, 0.5, 0.5], &[0.4, 0.5, 0.6], 2).unwrap();
        assert_relative_eq!(v.value, 4.0, max_relative = 1e-12);
        assert_eq!(
            hfe(&[0.5, 0.5], &[0.4, 0.5], 2),
            Err(Error::TooFewForParameters { n: 2, p: 2 })
        );
    }

    #[test]
    fn r_squared_examples() {
        let e = [0.0, 0.5, 1.0];
        assert_eq!(r_squared(&e, &e).unwrap(), 1.0);
        assert_eq!(r_squared(&[0.5; 3], &e).unwrap(), 0.0);
        assert_relative_eq!(
            r_squared(&[0.1, 0.5, 0.9], &e).unwrap(),
            0.96,
            max_relative = 1e-12
        );
        assert_eq!(r_squared(&e, &[0.3; 3]), Err(Error::RSquaredUndefined));
    }

    #[test]
    fn surrogate_matches_rsse_without_exclusions() {
        let calc = [0.2, 0.5, 0.7];
        let exp = [0.25, 0.45, 0.8];
        assert_relative_eq!(
            fitting_objective(&calc, &exp),
            rsse(&calc, &exp).unwrap().value
        );
        // Model collapsed to zero under positive data is penalized, not excluded.
        assert!(fitting_objective(&[0.0, 0.5], &[0.1, 0.5]) > 1e9);
        assert_eq!(fitting_objective(&[0.0, 0.5], &[0.0, 0.5]), 0.0);
    }
}
