//! Forward evaluation of the four breakthrough models.
//!
//! All forward functions return the effluent ratio C/C0 at time `t` (hr)
//! given canonical conditions.
//!
//! ```text
//! Thomas        C/C0 = 1 / (exp(K_T·q_m·CT − K_T·C0·t) + 1)
//! Yoon–Nelson   C/C0 = exp(K_YN·t − τ·K_YN) / (1 + exp(K_YN·t − τ·K_YN))
//! Clark         C/C0 = (1 + A·exp(−r·t))^(−1/(n−1))
//! Wolborska     C/C0 = min(1, exp(β_a·C0/N0·t − β_a·Z/U0))
//! ```
//!
//! Thomas and Yoon–Nelson coincide under `K_YN = K_T·C0`, `τ = q_m·CT/C0`.

use std::fmt;
use std::str::FromStr;

use crate::curve::BreakthroughCurve;
use crate::error::{Error, Result};
use crate::units::ExperimentConditions;

/// Logistic exponents beyond this magnitude short-circuit to 0 or 1.
pub const EXPONENT_SATURATION: f64 = 700.0;

/// `1 / (exp(z) + 1)` with saturation.
#[inline]
pub(crate) fn logistic_of_exponent(z: f64) -> f64 {
    if z > EXPONENT_SATURATION {
        0.0
    } else if z < -EXPONENT_SATURATION {
        1.0
    } else {
        1.0 / (z.exp() + 1.0)
    }
}

/// `exp(z) / (1 + exp(z))²`, the shared factor of both Thomas sensitivities.
#[inline]
pub(crate) fn logistic_slope(z: f64) -> f64 {
    if z.abs() > EXPONENT_SATURATION {
        return 0.0;
    }
    let s = logistic_of_exponent(z);
    s * (1.0 - s)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThomasParams {
    kt: f64,
    qm: f64,
}

impl ThomasParams {
    /// `kt` in L/(g·hr), `qm` in g per L of resin.
    pub fn new(kt: f64, qm: f64) -> Result<Self> {
        Ok(Self {
            kt: check_positive("K_T", kt)?,
            qm: check_positive("q_m", qm)?,
        })
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    pub fn qm(&self) -> f64 {
        self.qm
    }

    /// Time at which the ratio reaches one half: `q_m·CT / C0`.
    pub fn t50(&self, cond: &ExperimentConditions) -> f64 {
        self.qm * cond.contact_time() / cond.c0()
    }

    /// Exponent `K_T·q_m·CT − K_T·C0·t`.
    pub fn exponent(&self, cond: &ExperimentConditions, t: f64) -> f64 {
        self.kt * self.qm * cond.contact_time() - self.kt * cond.c0() * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoonNelsonParams {
    k_yn: f64,
    tau: f64,
}

impl YoonNelsonParams {
    /// `k_yn` in 1/hr, `tau` in hr.
    pub fn new(k_yn: f64, tau: f64) -> Result<Self> {
        Ok(Self {
            k_yn: check_positive("K_YN", k_yn)?,
            tau: check_positive("tau", tau)?,
        })
    }

    /// Maps Thomas parameters onto the equivalent Yoon–Nelson pair.
    pub fn from_thomas(p: &ThomasParams, cond: &ExperimentConditions) -> Self {
        Self {
            k_yn: p.kt * cond.c0(),
            tau: p.t50(cond),
        }
    }

    pub fn to_thomas(&self, cond: &ExperimentConditions) -> Result<ThomasParams> {
        ThomasParams::new(
            self.k_yn / cond.c0(),
            self.tau * cond.c0() / cond.contact_time(),
        )
    }

    pub fn k_yn(&self) -> f64 {
        self.k_yn
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarkParams {
    a: f64,
    r: f64,
    n: f64,
}

impl ClarkParams {
    /// `r` in 1/hr; `n` is the Freundlich exponent and must exceed 1.
    pub fn new(a: f64, r: f64, n: f64) -> Result<Self> {
        let a = check_positive("A", a)?;
        let r = check_positive("r", r)?;
        if !(n.is_finite() && n > 1.0) {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n,
            });
        }
        Ok(Self { a, r, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n(&self) -> f64 {
        self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolborskaParams {
    beta_a: f64,
    n0: f64,
}

impl WolborskaParams {
    /// `beta_a` in 1/hr, `n0` in g/L.
    pub fn new(beta_a: f64, n0: f64) -> Result<Self> {
        Ok(Self {
            beta_a: check_positive("beta_a", beta_a)?,
            n0: check_positive("N0", n0)?,
        })
    }

    pub fn beta_a(&self) -> f64 {
        self.beta_a
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }
}

/// Thomas model, volume (contact-time) form.
pub fn thomas_forward(p: &ThomasParams, cond: &ExperimentConditions, t: f64) -> f64 {
    logistic_of_exponent(p.exponent(cond, t))
}

/// Thomas model, mass form: M/Q replaces CT and `q_m` is per kg of resin.
pub fn thomas_forward_mass(p: &ThomasParams, cond: &ExperimentConditions, t: f64) -> Result<f64> {
    let mass_time = cond.mass_time().ok_or(Error::MissingField("resin_mass"))?;
    Ok(logistic_of_exponent(
        p.kt * p.qm * mass_time - p.kt * cond.c0() * t,
    ))
}

pub fn yoon_nelson_forward(p: &YoonNelsonParams, t: f64) -> f64 {
    logistic_of_exponent(p.tau * p.k_yn - p.k_yn * t)
}

pub fn clark_forward(p: &ClarkParams, t: f64) -> f64 {
    // ln(1 + A·e^{-rt}) evaluated as softplus(ln A − r·t) so large A cannot overflow.
    let log_base = softplus(p.a.ln() - p.r * t);
    (-log_base / (p.n - 1.0)).exp()
}

pub fn wolborska_forward(p: &WolborskaParams, cond: &ExperimentConditions, t: f64) -> Result<f64> {
    let transit = cond.bed_transit_time()?;
    let exponent = p.beta_a * cond.c0() / p.n0 * t - p.beta_a * transit;
    Ok(if exponent >= 0.0 { 1.0 } else { exponent.exp() })
}

/// Thomas log-linearization `(t, ln(C0/C − 1))` of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedCurve {
    pub points: Vec<(f64, f64)>,
    /// Points at exactly 0 or 1 that have no finite transform.
    pub excluded: usize,
}

pub fn thomas_linearized(curve: &BreakthroughCurve) -> Result<LinearizedCurve> {
    let mut points = Vec::with_capacity(curve.len());
    let mut excluded = 0;
    for p in curve.points() {
        if p.ratio > 0.0 && p.ratio < 1.0 {
            points.push((p.t, (1.0 / p.ratio - 1.0).ln()));
        } else {
            excluded += 1;
        }
    }
    if points.len() < 2 {
        return Err(Error::NoLinearizablePoints);
    }
    Ok(LinearizedCurve { points, excluded })
}

/// Thomas parameters from an ordinary least-squares line through the
/// linearized curve: slope = −K_T·C0, intercept = K_T·q_m·CT.
pub fn thomas_linear_estimate(curve: &BreakthroughCurve) -> Result<ThomasParams> {
    let lin = thomas_linearized(curve)?;
    let n = lin.points.len() as f64;
    let mean_t = lin.points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = lin.points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = lin.points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = lin
        .points
        .iter()
        .map(|p| (p.0 - mean_t) * (p.1 - mean_y))
        .sum();
    if sxx == 0.0 {
        return Err(Error::NoLinearizablePoints);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let cond = curve.conditions();
    let kt = -slope / cond.c0();
    let qm = intercept / (kt * cond.contact_time());
    ThomasParams::new(kt, qm)
}

/// Time at which the Thomas curve reaches a target ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakthroughTime {
    pub hours: f64,
    /// The model already exceeds the target at t = 0 (`hours` is negative).
    pub already_past: bool,
}

pub fn breakthrough_time(
    p: &ThomasParams,
    cond: &ExperimentConditions,
    target_ratio: f64,
) -> Result<BreakthroughTime> {
    if !(target_ratio > 0.0 && target_ratio < 1.0) {
        return Err(Error::InvalidTarget(target_ratio));
    }
    let hours = (p.qm * cond.contact_time() - (1.0 / target_ratio - 1.0).ln() / p.kt) / cond.c0();
    Ok(BreakthroughTime {
        hours,
        already_past: hours < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Thomas,
    YoonNelson,
    Clark,
    Wolborska,
}

impl ModelKind {
    /// Declared order, also used as the ranking tiebreak.
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Thomas,
        ModelKind::YoonNelson,
        ModelKind::Clark,
        ModelKind::Wolborska,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Thomas => "thomas",
            Self::YoonNelson => "yoon-nelson",
            Self::Clark => "clark",
            Self::Wolborska => "wolborska",
        }
    }

    pub fn param_count(self) -> usize {
        self.param_keys().len()
    }

    /// Parameter names with units, in canonical order.
    pub fn param_keys(self) -> &'static [&'static str] {
        match self {
            Self::Thomas => &["kt_l_per_g_hr", "qm_g_per_l"],
            Self::YoonNelson => &["kyn_per_hr", "tau_hr"],
            Self::Clark => &["a", "r_per_hr", "n"],
            Self::Wolborska => &["beta_a_per_hr", "n0_g_per_l"],
        }
    }

    /// Short parameter symbols, in canonical order.
    pub fn param_symbols(self) -> &'static [&'static str] {
        match self {
            Self::Thomas => &["kt", "qm"],
            Self::YoonNelson => &["kyn", "tau"],
            Self::Clark => &["a", "r", "n"],
            Self::Wolborska => &["beta_a", "n0"],
        }
    }

    pub fn param_index(self, symbol: &str) -> Option<usize> {
        self.param_symbols().iter().position(|s| *s == symbol)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "thomas" => Ok(Self::Thomas),
            "yoon-nelson" | "yoon_nelson" | "yoonnelson" => Ok(Self::YoonNelson),
            "clark" => Ok(Self::Clark),
            "wolborska" => Ok(Self::Wolborska),
            other => Err(Error::ModelMismatch(format!("unknown model `{other}`"))),
        }
    }
}

/// Parameters for any of the four models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterSet {
    Thomas(ThomasParams),
    YoonNelson(YoonNelsonParams),
    Clark(ClarkParams),
    Wolborska(WolborskaParams),
}

impl ParameterSet {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Thomas(_) => ModelKind::Thomas,
            Self::YoonNelson(_) => ModelKind::YoonNelson,
            Self::Clark(_) => ModelKind::Clark,
            Self::Wolborska(_) => ModelKind::Wolborska,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Thomas(p) => vec![p.kt, p.qm],
            Self::YoonNelson(p) => vec![p.k_yn, p.tau],
            Self::Clark(p) => vec![p.a, p.r, p.n],
            Self::Wolborska(p) => vec![p.beta_a, p.n0],
        }
    }

    pub fn from_values(kind: ModelKind, values: &[f64]) -> Result<Self> {
        if values.len() != kind.param_count() {
            return Err(Error::ModelMismatch(format!(
                "{kind} takes {} parameters, got {}",
                kind.param_count(),
                values.len()
            )));
        }
        Ok(match kind {
            ModelKind::Thomas => Self::Thomas(ThomasParams::new(values[0], values[1])?),
            ModelKind::YoonNelson => Self::YoonNelson(YoonNelsonParams::new(values[0], values[1])?),
            ModelKind::Clark => Self::Clark(ClarkParams::new(values[0], values[1], values[2])?),
            ModelKind::Wolborska => Self::Wolborska(WolborskaParams::new(values[0], values[1])?),
        })
    }

    pub fn as_thomas(&self) -> Option<&ThomasParams> {
        match self {
            Self::Thomas(p) => Some(p),
            _ => None,
        }
    }

    pub fn evaluate(&self, cond: &ExperimentConditions, t: f64) -> Result<f64> {
        Ok(match self {
            Self::Thomas(p) => thomas_forward(p, cond, t),
            Self::YoonNelson(p) => yoon_nelson_forward(p, t),
            Self::Clark(p) => clark_forward(p, t),
            Self::Wolborska(p) => wolborska_forward(p, cond, t)?,
        })
    }

    pub fn evaluate_many(&self, cond: &ExperimentConditions, times: &[f64]) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.evaluate(cond, t)).collect()
    }
}

/// `n` evenly spaced points on `[start, end]`.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        end
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ConditionsFile;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cond(c0_ppb: f64, ct_min: f64) -> ExperimentConditions {
        ConditionsFile {
            c0_ppb,
            q_l_per_hr: 0.85,
            v_ml: 0.85 * ct_min / 60.0 * 1000.0,
            ct_min: Some(ct_min),
            u0_cm_per_min: Some(8.0),
            z_cm: Some(6.0),
            diameter_cm: None,
            m_kg: None,
            resin_id: "A600E".into(),
        }
        .to_canonical()
        .unwrap()
    }

    fn exp1() -> (ThomasParams, ExperimentConditions) {
        (ThomasParams::new(502.0, 0.3828).unwrap(), cond(14.73, 0.75))
    }

    #[test]
    fn thomas_at_time_zero() {
        let (p, c) = exp1();
        assert_relative_eq!(p.exponent(&c, 0.0), 2.4021, max_relative = 1e-4);
        assert_relative_eq!(thomas_forward(&p, &c, 0.0), 0.0830, max_relative = 1e-3);
    }

    #[test]
    fn thomas_half_at_t50() {
        let (p, c) = exp1();
        assert_relative_eq!(p.t50(&c), 324.85, max_relative = 1e-4);
        assert_relative_eq!(thomas_forward(&p, &c, p.t50(&c)), 0.5, epsilon = 1e-14);
        assert_eq!(thomas_forward(&p, &c, 1e9), 1.0);
    }

    #[test]
    fn saturation_limits() {
        assert_eq!(logistic_of_exponent(701.0), 0.0);
        assert_eq!(logistic_of_exponent(-701.0), 1.0);
        assert_eq!(logistic_of_exponent(1e308), 0.0);
        assert!(logistic_of_exponent(699.0) > 0.0);
        assert_eq!(logistic_slope(800.0), 0.0);
    }

    #[test]
    fn mass_form_needs_mass() {
        let (p, c) = exp1();
        assert_eq!(
            thomas_forward_mass(&p, &c, 0.0),
            Err(Error::MissingField("resin_mass"))
        );
        let mut f = c.to_file();
        f.m_kg = Some(0.0085);
        let cm = f.to_canonical().unwrap();
        // M/Q = 0.01 kg·hr/L
        let expected = 1.0 / ((502.0 * 0.3828 * 0.01f64).exp() + 1.0);
        assert_relative_eq!(
            thomas_forward_mass(&p, &cm, 0.0).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn linearized_values() {
        let c = cond(14.73, 0.75);
        let curve = BreakthroughCurve::from_series(
            &[0.0, 1.0, 2.0, 3.0],
            &[0.0, 0.5, 0.1, 1.0],
            c.clone(),
            "x",
        )
        .unwrap();
        let lin = thomas_linearized(&curve).unwrap();
        assert_eq!(lin.excluded, 2);
        assert_eq!(lin.points[0].1, 0.0);
        assert_relative_eq!(lin.points[1].1, 9f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(lin.points[1].1, 2.1972, max_relative = 1e-4);

        let zeros = BreakthroughCurve::from_series(&[0.0, 1.0, 2.0], &[0.0; 3], c, "z").unwrap();
        assert_eq!(thomas_linearized(&zeros), Err(Error::NoLinearizablePoints));
    }

    #[test]
    fn linear_estimate_recovers_exact_thomas() {
        let (p, c) = exp1();
        let times = linspace(0.0, 650.0, 20);
        let ratios: Vec<f64> = times.iter().map(|&t| thomas_forward(&p, &c, t)).collect();
        let curve = BreakthroughCurve::from_series(&times, &ratios, c, "x").unwrap();
        let est = thomas_linear_estimate(&curve).unwrap();
        assert_relative_eq!(est.kt(), 502.0, max_relative = 1e-8);
        assert_relative_eq!(est.qm(), 0.3828, max_relative = 1e-8);
    }

    #[test]
    fn yoon_nelson_midpoint_and_mapping() {
        let (p, c) = exp1();
        let yn = YoonNelsonParams::from_thomas(&p, &c);
        assert_relative_eq!(yn.k_yn(), 7.3945e-3, max_relative = 1e-4);
        assert_relative_eq!(yn.tau(), 324.85, max_relative = 1e-4);
        assert_relative_eq!(yoon_nelson_forward(&yn, yn.tau()), 0.5, epsilon = 1e-15);
        assert_relative_eq!(yoon_nelson_forward(&yn, 0.0), 0.0830, max_relative = 1e-3);
        let back = yn.to_thomas(&c).unwrap();
        assert_relative_eq!(back.kt(), 502.0, max_relative = 1e-12);
        assert_relative_eq!(back.qm(), 0.3828, max_relative = 1e-12);
    }

    #[test]
    fn clark_values() {
        let p = ClarkParams::new(1.0, 0.3, 2.0).unwrap();
        assert_relative_eq!(clark_forward(&p, 0.0), 0.5, epsilon = 1e-15);
        let p = ClarkParams::new(3.0, 0.3, 2.0).unwrap();
        assert_relative_eq!(clark_forward(&p, 1e4), 1.0, epsilon = 1e-12);
        let huge = ClarkParams::new(1e300, 0.3, 2.0).unwrap();
        assert!(clark_forward(&huge, 0.0).is_finite());
        assert!(ClarkParams::new(1.0, 0.3, 1.0).is_err());
        assert!(ClarkParams::new(0.0, 0.3, 2.0).is_err());
    }

    #[test]
    fn clark_with_n2_is_logistic() {
        let (p, c) = exp1();
        let clark = ClarkParams::new(p.exponent(&c, 0.0).exp(), p.kt() * c.c0(), 2.0).unwrap();
        for t in linspace(0.0, 700.0, 50) {
            assert_relative_eq!(
                clark_forward(&clark, t),
                thomas_forward(&p, &c, t),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn wolborska_values() {
        let c = cond(14.73, 0.75);
        let transit = c.bed_transit_time().unwrap();
        let p = WolborskaParams::new(std::f64::consts::LN_10 / transit, 0.3).unwrap();
        assert_relative_eq!(
            wolborska_forward(&p, &c, 0.0).unwrap(),
            0.1,
            max_relative = 1e-12
        );
        let ceiling = 0.3 * transit / c.c0();
        assert_relative_eq!(
            wolborska_forward(&p, &c, ceiling).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(wolborska_forward(&p, &c, 10.0 * ceiling).unwrap(), 1.0);

        let mut f = c.to_file();
        f.z_cm = None;
        let no_depth = f.to_canonical().unwrap();
        assert_eq!(
            wolborska_forward(&p, &no_depth, 0.0),
            Err(Error::MissingField("bed_depth"))
        );
    }

    #[test]
    fn breakthrough_time_examples() {
        let (p, c) = exp1();
        let t50 = breakthrough_time(&p, &c, 0.5).unwrap();
        assert_relative_eq!(t50.hours, 324.85, max_relative = 1e-4);
        assert!(!t50.already_past);
        let t10 = breakthrough_time(&p, &c, 0.1).unwrap();
        assert_relative_eq!(t10.hours, 27.70, max_relative = 1e-3);
        assert!(breakthrough_time(&p, &c, 0.0).is_err());
        assert!(breakthrough_time(&p, &c, 1.0).is_err());
        let early = breakthrough_time(&p, &c, 0.01).unwrap();
        assert!(early.already_past && early.hours < 0.0);
    }

    #[test]
    fn parameter_set_round_trip() {
        for kind in ModelKind::ALL {
            let values: Vec<f64> = (0..kind.param_count()).map(|i| 2.0 + i as f64).collect();
            let set = ParameterSet::from_values(kind, &values).unwrap();
            assert_eq!(set.kind(), kind);
            assert_eq!(set.values(), values);
            assert_eq!(kind.name().parse::<ModelKind>().unwrap(), kind);
        }
        assert!(ParameterSet::from_values(ModelKind::Thomas, &[1.0]).is_err());
    }

    #[test]
    fn contact_time_invariance() {
        let (p, _) = exp1();
        let base = ConditionsFile {
            c0_ppb: 14.73,
            q_l_per_hr: 0.85,
            v_ml: 10.6,
            ct_min: None,
            u0_cm_per_min: None,
            z_cm: None,
            diameter_cm: None,
            m_kg: None,
            resin_id: "A600E".into(),
        };
        let mut scaled = base.clone();
        scaled.q_l_per_hr *= 538.87;
        scaled.v_ml *= 538.87;
        let (a, b) = (base.to_canonical().unwrap(), scaled.to_canonical().unwrap());
        for t in linspace(0.0, 700.0, 40) {
            assert_relative_eq!(
                thomas_forward(&p, &a, t),
                thomas_forward(&p, &b, t),
                max_relative = 1e-12
            );
        }
    }

    proptest! {
        #[test]
        fn forwards_are_monotone(
            kt in 50.0f64..5000.0,
            qm in 0.05f64..1.0,
            a in 0.01f64..1e4,
            r in 1e-3f64..1.0,
            n in 1.05f64..5.0,
            beta in 0.1f64..1e3,
            n0 in 0.01f64..1.0,
        ) {
            let c = cond(14.73, 0.75);
            let sets = [
                ParameterSet::Thomas(ThomasParams::new(kt, qm).unwrap()),
                ParameterSet::YoonNelson(YoonNelsonParams::new(kt * c.c0(), qm * 800.0).unwrap()),
                ParameterSet::Clark(ClarkParams::new(a, r, n).unwrap()),
                ParameterSet::Wolborska(WolborskaParams::new(beta, n0).unwrap()),
            ];
            let grid = linspace(0.0, 5000.0, 400);
            for set in sets {
                let ys = set.evaluate_many(&c, &grid).unwrap();
                for w in ys.windows(2) {
                    prop_assert!(w[1] >= w[0], "{:?} decreased", set.kind());
                }
                prop_assert!(ys.iter().all(|y| (0.0..=1.0).contains(y)));
            }
        }

        #[test]
        fn breakthrough_time_inverts_forward(
            kt in 100.0f64..3000.0,
            qm in 0.1f64..0.5,
            target in 0.01f64..0.99,
        ) {
            let c = cond(20.0, 0.6);
            let p = ThomasParams::new(kt, qm).unwrap();
            let bt = breakthrough_time(&p, &c, target).unwrap();
            let y = thomas_forward(&p, &c, bt.hours);
            prop_assert!((y - target).abs() < 1e-9);
        }
    }
}
