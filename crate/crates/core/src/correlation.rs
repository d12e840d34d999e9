//! Predictive correlation: a fixed resin capacity `q_m` shared across
//! experiments, and a rate constant that varies linearly with operating
//! conditions,
//!
//! ```text
//! K_T = a·CT + b·C0 + c        (CT in min, C0 in ppb, K_T in L/(g·hr))
//! ```
//!
//! The coefficients keep the minute/ppb units of the reference correlations;
//! conversion to canonical units happens only when a curve is predicted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::models::{thomas_forward, ModelKind, ThomasParams};
use crate::units::ExperimentConditions;

/// One experiment feeding the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceExperiment {
    pub ct_min: f64,
    pub c0_ppb: f64,
    #[serde(rename = "kt_l_per_g_hr")]
    pub kt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationModel {
    pub resin_id: String,
    #[serde(rename = "qm_fixed_g_per_l")]
    pub qm_fixed: f64,
    /// K_T per minute of contact time.
    #[serde(rename = "a_per_min")]
    pub a: f64,
    /// K_T per ppb of inlet concentration.
    #[serde(rename = "b_per_ppb")]
    pub b: f64,
    pub c: f64,
    pub sources: Vec<SourceExperiment>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Which condition a single-variable correlation runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    ContactTime,
    InletConcentration,
}

impl CorrelationModel {
    pub fn from_plane(
        resin_id: impl Into<String>,
        qm_fixed: f64,
        plane: PlaneCoefficients,
        sources: Vec<SourceExperiment>,
    ) -> Result<Self> {
        let m = Self {
            resin_id: resin_id.into(),
            qm_fixed,
            a: plane.a,
            b: plane.b,
            c: plane.c,
            sources,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_line(
        resin_id: impl Into<String>,
        qm_fixed: f64,
        axis: Axis,
        line: LineFit,
        sources: Vec<SourceExperiment>,
    ) -> Result<Self> {
        let (a, b) = match axis {
            Axis::ContactTime => (line.slope, 0.0),
            Axis::InletConcentration => (0.0, line.slope),
        };
        Self::from_plane(
            resin_id,
            qm_fixed,
            PlaneCoefficients {
                a,
                b,
                c: line.intercept,
            },
            sources,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.qm_fixed.is_finite() && self.qm_fixed > 0.0) {
            return Err(Error::InvalidParameter {
                name: "q_m",
                value: self.qm_fixed,
            });
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, value: v });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("correlation model serializes")
    }

    /// True when `(ct_min, c0_ppb)` lies inside the convex hull of the
    /// source conditions.
    pub fn covers(&self, ct_min: f64, c0_ppb: f64) -> bool {
        let pts: Vec<(f64, f64)> = self.sources.iter().map(|s| (s.ct_min, s.c0_ppb)).collect();
        in_convex_hull(&pts, (ct_min, c0_ppb))
    }
}

/// Mean `q_m` over Thomas fits of a single resin.
pub fn average_qm(fits: &[FitResult]) -> Result<f64> {
    let first = fits.first().ok_or(Error::Empty("fits"))?;
    let resin = first.conditions.resin_id();
    let mut sum = 0.0;
    for f in fits {
        let p = f.thomas().ok_or_else(|| {
            Error::ModelMismatch(format!("{} fit `{}` is not a Thomas fit", f.model, f.label))
        })?;
        if f.conditions.resin_id() != resin {
            return Err(Error::ModelMismatch(format!(
                "mixed resins: {resin} and {}",
                f.conditions.resin_id()
            )));
        }
        sum += p.qm();
    }
    debug_assert_eq!(first.model, ModelKind::Thomas);
    Ok(sum / fits.len() as f64)
}

fn distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Unweighted least-squares plane `K_T = a·CT + b·C0 + c`.
///
/// Solved on mean-centered columns, which reduces the normal equations to a
/// 2×2 system for `(a, b)`.
pub fn fit_plane(triples: &[SourceExperiment]) -> Result<PlaneCoefficients> {
    if triples.len() < 3 {
        return Err(Error::DegenerateDesign(format!(
            "need at least 3 experiments for a plane, got {}",
            triples.len()
        )));
    }
    if distinct(triples.iter().map(|s| s.ct_min)) < 2 {
        return Err(Error::DegenerateDesign("contact time not varied".into()));
    }
    if distinct(triples.iter().map(|s| s.c0_ppb)) < 2 {
        return Err(Error::DegenerateDesign(
            "inlet concentration not varied".into(),
        ));
    }
    let n = triples.len() as f64;
    let mean_ct = triples.iter().map(|s| s.ct_min).sum::<f64>() / n;
    let mean_c0 = triples.iter().map(|s| s.c0_ppb).sum::<f64>() / n;
    let mean_kt = triples.iter().map(|s| s.kt).sum::<f64>() / n;

    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in triples {
        let x1 = s.ct_min - mean_ct;
        let x2 = s.c0_ppb - mean_c0;
        let y = s.kt - mean_kt;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        s1y += x1 * y;
        s2y += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det <= 1e-12 * s11 * s22 {
        return Err(Error::DegenerateDesign(
            "contact time and inlet concentration vary together".into(),
        ));
    }
    let a = (s22 * s1y - s12 * s2y) / det;
    let b = (s11 * s2y - s12 * s1y) / det;
    Ok(PlaneCoefficients {
        a,
        b,
        c: mean_kt - a * mean_ct - b * mean_c0,
    })
}

/// Ordinary least-squares line through `(x, K_T)` pairs.
pub fn fit_line(pairs: &[(f64, f64)]) -> Result<LineFit> {
    if pairs.len() < 2 || distinct(pairs.iter().map(|p| p.0)) < 2 {
        return Err(Error::DegenerateDesign(
            "need at least 2 distinct x values".into(),
        ));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KtPrediction {
    /// L/(g·hr).
    pub kt: f64,
    /// Whether the query lies inside the hull of the source conditions.
    pub in_hull: bool,
}

/// Evaluates the correlation at a contact time (min) and inlet
/// concentration (ppb).
pub fn predict_kt(m: &CorrelationModel, ct_min: f64, c0_ppb: f64) -> Result<KtPrediction> {
    if !(ct_min.is_finite() && ct_min > 0.0) {
        return Err(Error::InvalidParameter {
            name: "contact_time",
            value: ct_min,
        });
    }
    if !(c0_ppb.is_finite() && c0_ppb > 0.0) {
        return Err(Error::InvalidParameter {
            name: "inlet_concentration",
            value: c0_ppb,
        });
    }
    let kt = m.a * ct_min + m.b * c0_ppb + m.c;
    if kt <= 0.0 {
        return Err(Error::Extrapolation(kt));
    }
    Ok(KtPrediction {
        kt,
        in_hull: m.covers(ct_min, c0_ppb),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePrediction {
    pub params: ThomasParams,
    pub in_hull: bool,
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
}

/// Full Thomas curve under `cond`, using the correlated K_T and the fixed q_m.
pub fn predict_curve(
    m: &CorrelationModel,
    cond: &ExperimentConditions,
    times: &[f64],
) -> Result<CurvePrediction> {
    let kt = predict_kt(m, cond.contact_time_min(), cond.c0_ppb())?;
    let params = ThomasParams::new(kt.kt, m.qm_fixed)?;
    let ratios = times
        .iter()
        .map(|&t| thomas_forward(&params, cond, t))
        .collect();
    Ok(CurvePrediction {
        params,
        in_hull: kt.in_hull,
        times: times.to_vec(),
        ratios,
    })
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Point-in-convex-hull test, tolerant of degenerate (point or segment)
/// hulls. Axes are rescaled by their spans so the tolerance is unitless.
fn in_convex_hull(points: &[(f64, f64)], q: (f64, f64)) -> bool {
    if points.is_empty() {
        return false;
    }
    let span = |f: fn(&(f64, f64)) -> f64| {
        let lo = points.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        (lo, if hi > lo { hi - lo } else { 1.0 })
    };
    let (x0, sx) = span(|p| p.0);
    let (y0, sy) = span(|p| p.1);
    let norm = |p: (f64, f64)| ((p.0 - x0) / sx, (p.1 - y0) / sy);
    let q = norm(q);
    let mut pts: Vec<(f64, f64)> = points.iter().map(|&p| norm(p)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    const TOL: f64 = 1e-9;

    // Andrew's monotone chain.
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }

    match hull.len() {
        0 | 1 => {
            let p = pts[0];
            (p.0 - q.0).abs() <= TOL && (p.1 - q.1).abs() <= TOL
        }
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let len2 = (b.0 - a.0).powi(2) + (b.1 - a.1).powi(2);
            let along = ((q.0 - a.0) * (b.0 - a.0) + (q.1 - a.1) * (b.1 - a.1)) / len2;
            cross(a, b, q).abs() <= TOL * len2.sqrt() && (-TOL..=1.0 + TOL).contains(&along)
        }
        k => (0..k).all(|i| cross(hull[i], hull[(i + 1) % k], q) >= -TOL),
    }
}
