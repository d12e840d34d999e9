//! Box-constrained, derivative-free parameter estimation.
//!
//! Parameters are searched in log space (Clark's `n` as `ln(n − 1)`), which
//! keeps every trial point physically valid. Each fit runs a fixed schedule
//! of five log-spaced starts, each followed by one simplex restart, so the
//! result is a pure function of its inputs.

use crate::curve::BreakthroughCurve;
use crate::error::{Error, Result};
use crate::estimation::objective::{fitting_objective, hfe, r_squared, rsse};
use crate::estimation::simplex::{minimize, SimplexOptions};
use crate::models::{ModelKind, ParameterSet};
use crate::units::ExperimentConditions;

/// Relative distance (over the box width) under which a bound is active.
pub const ACTIVE_BOUND_TOLERANCE: f64 = 1e-3;

/// Positions of the multi-start points along each log-spaced range.
const START_FRACTIONS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
/// Unbounded start ranges for the Thomas pair; other models map from these.
const KT_START_RANGE: (f64, f64) = (1e1, 1e4);
const QM_START_RANGE: (f64, f64) = (1e-2, 1e0);
const UNBOUNDED_STEP: f64 = 0.3;

/// Per-parameter box in natural units, canonical parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "{} lower vs {} upper values",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo < hi) {
                return Err(Error::InvalidBounds(format!(
                    "parameter {i}: need 0 < lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// A box of ±`fraction` around each parameter of `center`.
    pub fn around(center: &ParameterSet, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidBounds(format!(
                "fraction {fraction} outside (0, 1)"
            )));
        }
        let values = center.values();
        let mut lower: Vec<f64> = values.iter().map(|v| v * (1.0 - fraction)).collect();
        let upper: Vec<f64> = values.iter().map(|v| v * (1.0 + fraction)).collect();
        if let ParameterSet::Clark(p) = center {
            // n must stay above 1.
            lower[2] = 1.0 + (p.n() - 1.0) * (1.0 - fraction);
        }
        Self::new(lower, upper)
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Per-parameter flags: value within tolerance of either bound.
    pub fn active(&self, values: &[f64]) -> Vec<bool> {
        values
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| {
                let width = hi - lo;
                (v - lo).abs() / width < ACTIVE_BOUND_TOLERANCE
                    || (hi - v).abs() / width < ACTIVE_BOUND_TOLERANCE
            })
            .collect()
    }
}

/// Which model to fit and which of its parameters are held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    pinned: Vec<Option<f64>>,
    /// Count pinned parameters in the HFE `n − p` denominator.
    hfe_counts_pinned: bool,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            pinned: vec![None; kind.param_count()],
            hfe_counts_pinned: true,
        }
    }

    /// Holds the parameter named by `symbol` (e.g. `"qm"`, `"n"`) fixed.
    pub fn pin(mut self, symbol: &str, value: f64) -> Result<Self> {
        let idx = self.kind.param_index(symbol).ok_or_else(|| {
            Error::ModelMismatch(format!("{} has no parameter `{symbol}`", self.kind))
        })?;
        let valid = if self.kind == ModelKind::Clark && idx == 2 {
            value > 1.0
        } else {
            value > 0.0
        };
        if !(value.is_finite() && valid) {
            return Err(Error::InvalidParameter {
                name: self.kind.param_symbols()[idx],
                value,
            });
        }
        self.pinned[idx] = Some(value);
        Ok(self)
    }

    /// Use only the free parameters as `p` in the HFE denominator.
    pub fn hfe_free_parameters_only(mut self) -> Self {
        self.hfe_counts_pinned = false;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn pinned(&self) -> &[Option<f64>] {
        &self.pinned
    }

    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.pinned.len())
            .filter(|&i| self.pinned[i].is_none())
            .collect()
    }

    pub fn hfe_param_count(&self) -> usize {
        if self.hfe_counts_pinned {
            self.kind.param_count()
        } else {
            self.free_indices().len()
        }
    }
}

/// Outcome of a fit, with quality statistics evaluated at the final
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ModelKind,
    pub params: ParameterSet,
    pub rsse: f64,
    /// Percent.
    pub hfe: f64,
    pub hfe_param_count: usize,
    /// `None` when the data are constant.
    pub r_squared: Option<f64>,
    pub n_points_used: usize,
    pub excluded_points: usize,
    pub pinned: Vec<bool>,
    pub bounds: Option<Bounds>,
    pub active_bounds: Vec<bool>,
    pub converged: bool,
    pub iterations: usize,
    pub conditions: ExperimentConditions,
    pub label: String,
}

impl FitResult {
    pub fn thomas(&self) -> Option<&crate::models::ThomasParams> {
        self.params.as_thomas()
    }
}

/// Quality of a parameter set against a measured curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitStatistics {
    pub rsse: f64,
    pub hfe: f64,
    pub r_squared: Option<f64>,
    pub used: usize,
    pub excluded: usize,
}

/// RSSE, HFE (with `p` parameters) and R² of `params` on `curve`.
pub fn assess(params: &ParameterSet, curve: &BreakthroughCurve, p: usize) -> Result<FitStatistics> {
    let calc = params.evaluate_many(curve.conditions(), &curve.times())?;
    let exp = curve.ratios();
    let rs = rsse(&calc, &exp)?;
    let hf = hfe(&calc, &exp, p)?;
    Ok(FitStatistics {
        rsse: rs.value,
        hfe: hf.value,
        r_squared: r_squared(&calc, &exp).ok(),
        used: rs.used,
        excluded: rs.excluded,
    })
}

fn to_search(kind: ModelKind, idx: usize, value: f64) -> f64 {
    if kind == ModelKind::Clark && idx == 2 {
        (value - 1.0).ln()
    } else {
        value.ln()
    }
}

fn from_search(kind: ModelKind, idx: usize, s: f64) -> f64 {
    if kind == ModelKind::Clark && idx == 2 {
        s.exp() + 1.0
    } else {
        s.exp()
    }
}

/// Natural-space parameters equivalent to a Thomas `(K_T, q_m)` pair.
fn mapped_from_thomas(
    kind: ModelKind,
    kt: f64,
    qm: f64,
    cond: &ExperimentConditions,
) -> Result<Vec<f64>> {
    let ct = cond.contact_time();
    let c0 = cond.c0();
    Ok(match kind {
        ModelKind::Thomas => vec![kt, qm],
        ModelKind::YoonNelson => vec![kt * c0, qm * ct / c0],
        ModelKind::Clark => vec![(kt * qm * ct).min(700.0).exp(), kt * c0, 2.0],
        ModelKind::Wolborska => {
            let transit = cond.bed_transit_time()?;
            let beta = kt * qm * ct / transit;
            vec![beta, beta / kt]
        }
    })
}

/// Fits `spec`'s model to `curve` by minimizing RSSE.
pub fn fit(
    curve: &BreakthroughCurve,
    spec: &ModelSpec,
    init: Option<&ParameterSet>,
    bounds: Option<&Bounds>,
) -> Result<FitResult> {
    let kind = spec.kind;
    let n_params = kind.param_count();
    let cond = curve.conditions();

    if let Some(b) = bounds {
        if b.lower.len() != n_params {
            return Err(Error::InvalidBounds(format!(
                "{kind} takes {n_params} bounds, got {}",
                b.lower.len()
            )));
        }
        if kind == ModelKind::Clark && b.lower[2] <= 1.0 {
            return Err(Error::InvalidBounds(
                "Clark n lower bound must exceed 1".into(),
            ));
        }
    }
    if let Some(init) = init {
        if init.kind() != kind {
            return Err(Error::ModelMismatch(format!(
                "initial point is {}, model is {kind}",
                init.kind()
            )));
        }
        if let Some(b) = bounds {
            if !b.contains(&init.values()) {
                return Err(Error::InvalidBounds("initial point outside bounds".into()));
            }
        }
    }
    // Fail early on conditions the model cannot use.
    if kind == ModelKind::Wolborska {
        cond.bed_transit_time()?;
    }

    let free = spec.free_indices();
    let times = curve.times();
    let data = curve.ratios();

    let assemble = |x: &[f64]| -> Vec<f64> {
        let mut full: Vec<f64> = spec.pinned.iter().map(|p| p.unwrap_or(f64::NAN)).collect();
        for (k, &i) in free.iter().enumerate() {
            full[i] = from_search(kind, i, x[k]);
        }
        full
    };

    let (search_lower, search_upper): (Option<Vec<f64>>, Option<Vec<f64>>) = match bounds {
        Some(b) => (
            Some(
                free.iter()
                    .map(|&i| to_search(kind, i, b.lower[i]))
                    .collect(),
            ),
            Some(
                free.iter()
                    .map(|&i| to_search(kind, i, b.upper[i]))
                    .collect(),
            ),
        ),
        None => (None, None),
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(init) = init {
        let values = init.values();
        starts.push(
            free.iter()
                .map(|&i| to_search(kind, i, values[i]))
                .collect(),
        );
    }
    for &u in &START_FRACTIONS {
        let start = match (&search_lower, &search_upper) {
            (Some(lo), Some(hi)) => lo.iter().zip(hi).map(|(l, h)| l + u * (h - l)).collect(),
            _ => {
                let kt = KT_START_RANGE.0 * (KT_START_RANGE.1 / KT_START_RANGE.0).powf(u);
                let qm = QM_START_RANGE.0 * (QM_START_RANGE.1 / QM_START_RANGE.0).powf(u);
                let natural = mapped_from_thomas(kind, kt, qm, cond)?;
                free.iter()
                    .map(|&i| to_search(kind, i, natural[i]))
                    .collect()
            }
        };
        starts.push(start);
    }

    let step: Vec<f64> = match (&search_lower, &search_upper) {
        (Some(lo), Some(hi)) => lo
            .iter()
            .zip(hi)
            .map(|(l, h)| UNBOUNDED_STEP.min(0.25 * (h - l)))
            .collect(),
        _ => vec![UNBOUNDED_STEP; free.len()],
    };

    let objective = |x: &[f64]| -> f64 {
        let full = assemble(x);
        let Ok(params) = ParameterSet::from_values(kind, &full) else {
            return f64::INFINITY;
        };
        match params.evaluate_many(cond, &times) {
            Ok(calc) => fitting_objective(&calc, &data),
            Err(_) => f64::INFINITY,
        }
    };

    let options = SimplexOptions::default();
    let lo = search_lower.as_deref();
    let hi = search_upper.as_deref();

    let mut best_x: Vec<f64> = Vec::new();
    let mut best_f = f64::INFINITY;
    let mut best_converged = false;
    let mut iterations = 0;

    if free.is_empty() {
        best_f = objective(&[]);
        best_converged = true;
    }
    for start in starts.iter().filter(|_| !free.is_empty()) {
        let first = minimize(objective, start, &step, lo, hi, options);
        let second = minimize(objective, &first.x, &step, lo, hi, options);
        iterations += first.iterations + second.iterations;
        let run = if second.f <= first.f { second } else { first };
        if run.f < best_f || best_x.is_empty() {
            best_f = run.f;
            best_converged = run.converged;
            best_x = run.x;
        }
    }
    let converged = best_converged && best_f.is_finite();

    let values = assemble(&best_x);
    let params = ParameterSet::from_values(kind, &values)?;
    let hfe_p = spec.hfe_param_count();
    let stats = assess(&params, curve, hfe_p)?;

    let pinned: Vec<bool> = spec.pinned.iter().map(Option::is_some).collect();
    let active_bounds = match bounds {
        Some(b) => b
            .active(&values)
            .into_iter()
            .zip(&pinned)
            .map(|(a, p)| a && !p)
            .collect(),
        None => vec![false; n_params],
    };

    Ok(FitResult {
        model: kind,
        params,
        rsse: stats.rsse,
        hfe: stats.hfe,
        hfe_param_count: hfe_p,
        r_squared: stats.r_squared,
        n_points_used: stats.used,
        excluded_points: stats.excluded,
        pinned,
        bounds: bounds.cloned(),
        active_bounds,
        converged,
        iterations,
        conditions: cond.clone(),
        label: curve.label().to_string(),
    })
}

/// Thomas fit with `q_m` held at `qm`; only K_T is searched.
pub fn fit_fixed_qm(curve: &BreakthroughCurve, qm: f64) -> Result<FitResult> {
    if !(qm.is_finite() && qm > 0.0) {
        return Err(Error::InvalidParameter {
            name: "q_m",
            value: qm,
        });
    }
    let spec = ModelSpec::new(ModelKind::Thomas).pin("qm", qm)?;
    fit(curve, &spec, None, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{linspace, thomas_forward, ThomasParams};
    use crate::units::ConditionsFile;
    use approx::assert_relative_eq;

    fn cond() -> ExperimentConditions {
        ConditionsFile {
            c0_ppb: 14.73,
            q_l_per_hr: 0.85,
            v_ml: 10.6,
            ct_min: Some(0.75),
            u0_cm_per_min: Some(8.0),
            z_cm: None,
            diameter_cm: Some(1.5),
            m_kg: None,
            resin_id: "A600E".into(),
        }
        .to_canonical()
        .unwrap()
    }

    fn synthetic(kt: f64, qm: f64) -> BreakthroughCurve {
        let c = cond();
        let p = ThomasParams::new(kt, qm).unwrap();
        let times = linspace(0.0, 2.0 * p.t50(&c), 30);
        let ratios: Vec<f64> = times.iter().map(|&t| thomas_forward(&p, &c, t)).collect();
        BreakthroughCurve::from_series(&times, &ratios, c, "synthetic").unwrap()
    }

    #[test]
    fn bounds_validation() {
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![0.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![1.0, 2.0], vec![3.0]).is_err());
        let b = Bounds::new(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        assert_eq!(b.active(&[1.0005, 1.5]), vec![true, false]);
        assert_eq!(b.active(&[1.5, 1.9995]), vec![false, true]);
        assert!(!b.contains(&[0.5, 1.5]));
    }

    #[test]
    fn pin_rejects_bad_values() {
        let spec = ModelSpec::new(ModelKind::Thomas);
        assert!(spec.clone().pin("qm", 0.0).is_err());
        assert!(spec.clone().pin("zz", 1.0).is_err());
        assert!(ModelSpec::new(ModelKind::Clark).pin("n", 1.0).is_err());
        assert_eq!(spec.clone().pin("qm", 0.25).unwrap().hfe_param_count(), 2);
        assert_eq!(
            spec.pin("qm", 0.25)
                .unwrap()
                .hfe_free_parameters_only()
                .hfe_param_count(),
            1
        );
    }

    #[test]
    fn recovers_noiseless_thomas() {
        let r = fit(
            &synthetic(502.0, 0.3828),
            &ModelSpec::new(ModelKind::Thomas),
            None,
            None,
        )
        .unwrap();
        let p = r.thomas().unwrap();
        assert_relative_eq!(p.kt(), 502.0, max_relative = 1e-6);
        assert_relative_eq!(p.qm(), 0.3828, max_relative = 1e-6);
        assert!(r.converged);
        assert!(r.rsse < 1e-12);
        assert_eq!(r.excluded_points, 0);
    }

    #[test]
    fn fixed_qm_recovers_kt() {
        let curve = synthetic(769.0, 0.254);
        let r = fit_fixed_qm(&curve, 0.254).unwrap();
        assert_relative_eq!(r.thomas().unwrap().kt(), 769.0, max_relative = 1e-6);
        assert_eq!(r.thomas().unwrap().qm(), 0.254);
        assert_eq!(r.hfe_param_count, 2);
        let wrong = fit_fixed_qm(&curve, 0.3828).unwrap();
        assert!(wrong.rsse > r.rsse);
        assert!(fit_fixed_qm(&curve, 0.0).is_err());
    }

    #[test]
    fn bounded_fit_flags_active_bound() {
        let center = ParameterSet::Thomas(ThomasParams::new(502.0, 0.3828).unwrap());
        let bounds = Bounds::around(&center, 0.3).unwrap();
        let r = fit(
            &synthetic(1612.0, 0.2091),
            &ModelSpec::new(ModelKind::Thomas),
            Some(&center),
            Some(&bounds),
        )
        .unwrap();
        assert!(bounds.contains(&r.params.values()));
        assert!(r.active_bounds.iter().any(|&a| a), "{r:?}");
    }

    #[test]
    fn init_outside_bounds_rejected() {
        let bounds = Bounds::new(vec![100.0, 0.1], vec![200.0, 0.2]).unwrap();
        let init = ParameterSet::Thomas(ThomasParams::new(502.0, 0.3828).unwrap());
        let err = fit(
            &synthetic(502.0, 0.3828),
            &ModelSpec::new(ModelKind::Thomas),
            Some(&init),
            Some(&bounds),
        );
        assert!(matches!(err, Err(Error::InvalidBounds(_))));
    }

    #[test]
    fn other_models_fit_thomas_data() {
        let curve = synthetic(502.0, 0.3828);
        let yn = fit(&curve, &ModelSpec::new(ModelKind::YoonNelson), None, None).unwrap();
        assert!(yn.rsse < 1e-12, "{yn:?}");
        let clark = fit(&curve, &ModelSpec::new(ModelKind::Clark), None, None).unwrap();
        assert!(clark.rsse < 1e-8, "{clark:?}");
        let pinned = fit(
            &curve,
            &ModelSpec::new(ModelKind::Clark).pin("n", 2.0).unwrap(),
            None,
            None,
        )
        .unwrap();
        assert_eq!(pinned.params.values()[2], 2.0);
        assert!(pinned.rsse < 1e-12);
        let wol = fit(&curve, &ModelSpec::new(ModelKind::Wolborska), None, None).unwrap();
        assert!(wol.rsse > yn.rsse);
    }

    #[test]
    fn all_zero_data_is_undefined() {
        let c = cond();
        let curve =
            BreakthroughCurve::from_series(&[0.0, 1.0, 2.0, 3.0], &[0.0; 4], c, "zeros").unwrap();
        assert_eq!(
            fit(&curve, &ModelSpec::new(ModelKind::Thomas), None, None).unwrap_err(),
            Error::ObjectiveUndefined
        );
    }
}
