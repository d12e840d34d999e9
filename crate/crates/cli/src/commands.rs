use std::fmt::Write as _;

use breakcurve_core::reference::{self, A600E_QM, A600E_SOURCE_IDS, DEFAULT_LIMIT_PPB};
use breakcurve_core::{
    assess, average_qm, breakthrough_ratio, breakthrough_time, fit, fit_fixed_qm, fit_line,
    fit_plane, ingest_curve, linspace, predict_kt, sensitivity_profile, thomas_forward, Axis,
    Bounds, BreakthroughCurve, ConditionsFile, CorrelationModel, ExperimentConditions, FitResult,
    ModelKind, ModelSpec, ParameterSet, SourceExperiment, ThomasParams,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{CompareArgs, CorrelateArgs, FitArgs, PredictArgs, ReportArgs, SensitivityArgs};
use crate::error::{CliError, CliResult};
use crate::output::{round_sig, rounded_conditions, to_json, FitDocument, OutputSet};
use crate::refdata::{load, Input, RefKind};

/// Samples in every model curve written next to a fit.
pub const CURVE_SAMPLES: usize = 200;
/// Model curves extend this far past the last data point.
pub const CURVE_SPAN_FACTOR: f64 = 1.2;
/// Parameter perturbation for the comparison envelope.
pub const BAND_FRACTION: f64 = 0.05;
/// Ratio below which a curve counts as low-concentration for Wolborska.
pub const LOW_RATIO_CEILING: f64 = 0.3;

pub const BAND_CONSTRUCTION: &str =
    "pointwise min/max over the best model's curves with each parameter perturbed by -5% and +5%";

/// What a command reports back to `main`.
#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub warnings: Vec<String>,
}

fn conditions_from(input: &Input) -> CliResult<ExperimentConditions> {
    let file =
        ConditionsFile::from_json(&input.text).map_err(|e| CliError::parse(&input.source, e))?;
    Ok(file.to_canonical()?)
}

fn curve_from(input: &Input, cond: ExperimentConditions) -> CliResult<BreakthroughCurve> {
    ingest_curve(input.text.as_bytes(), cond, input.stem.clone()).map_err(|e| match e {
        breakcurve_core::Error::Parse { .. } | breakcurve_core::Error::TooFewPoints { .. } => {
            CliError::parse(&input.source, e)
        }
        other => other.into(),
    })
}

fn load_fit(spec: &str) -> CliResult<(Input, FitDocument)> {
    if spec.starts_with(crate::refdata::REF_PREFIX) {
        return Err(CliError::Parse(format!(
            "{spec}: fits cannot be bundled references"
        )));
    }
    let input = load(spec, RefKind::Conditions)?;
    let doc = FitDocument::parse(&input.text, &input.source)?;
    Ok((input, doc))
}

fn output_name(explicit: &Option<String>, fallback: &str) -> String {
    explicit.clone().unwrap_or_else(|| fallback.to_string())
}

fn data_rows(csv: &mut String, curve: &BreakthroughCurve) {
    for p in curve.points() {
        let _ = writeln!(csv, "data,{},{}", p.t, p.ratio);
    }
}

/// `kind,t_hr,ratio` CSV: sampled model rows then data rows.
fn tagged_curve_csv(times: &[f64], values: &[f64], data: Option<&BreakthroughCurve>) -> String {
    let mut csv = String::from("kind,t_hr,ratio\n");
    for (t, y) in times.iter().zip(values) {
        let _ = writeln!(csv, "model,{t},{y}");
    }
    if let Some(curve) = data {
        data_rows(&mut csv, curve);
    }
    csv
}

/// Compact number for terminal output.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e7).contains(&a) {
        format!("{x:.6e}")
    } else {
        format!("{}", round_sig(x))
    }
}

fn params_text(kind: ModelKind, values: &[f64]) -> String {
    kind.param_keys()
        .iter()
        .zip(values)
        .map(|(k, v)| format!("{k} = {}", num(*v)))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn cmd_fit(a: &FitArgs) -> CliResult<Outcome> {
    let cond_in = load(&a.conditions, RefKind::Conditions)?;
    let cond = conditions_from(&cond_in)?;
    let curve_in = load(&a.curve, RefKind::Curve)?;
    let curve = curve_from(&curve_in, cond)?;
    let mut inputs = vec![curve_in.source.clone(), cond_in.source.clone()];

    let mut spec = ModelSpec::new(a.model);
    if let Some(qm) = a.pin_qm {
        if a.model != ModelKind::Thomas {
            return Err(CliError::ModelMismatch(format!(
                "--pin-qm applies to thomas, not {}",
                a.model
            )));
        }
        spec = spec.pin("qm", qm)?;
    }
    if let Some(n) = a.pin_n {
        if a.model != ModelKind::Clark {
            return Err(CliError::ModelMismatch(format!(
                "--pin-n applies to clark, not {}",
                a.model
            )));
        }
        spec = spec.pin("n", n)?;
    }
    if a.hfe_free_params {
        spec = spec.hfe_free_parameters_only();
    }

    let mut init = match &a.init {
        Some(v) => Some(ParameterSet::from_values(a.model, v)?),
        None => None,
    };
    if let Some(path) = &a.init_from {
        let (input, doc) = load_fit(path)?;
        inputs.push(input.source);
        let p = doc.params()?;
        if p.kind() != a.model {
            return Err(CliError::ModelMismatch(format!(
                "{path} is a {} fit, model is {}",
                p.kind(),
                a.model
            )));
        }
        init = Some(p);
    }

    let bounds = match a.bounds_pct {
        Some(pct) => {
            let center = match &init {
                Some(p) => *p,
                None => fit(&curve, &spec, None, None)?.params,
            };
            Some(Bounds::around(&center, pct / 100.0)?)
        }
        None => None,
    };
    let result = fit(&curve, &spec, init.as_ref(), bounds.as_ref())?;

    // Sample from the persisted document so the CSV re-evaluates exactly.
    let doc = FitDocument::from_result(&result);
    let params = doc.params()?;
    let persisted_cond = doc.conditions()?;
    let times = linspace(0.0, CURVE_SPAN_FACTOR * curve.max_time(), CURVE_SAMPLES);
    let values = params.evaluate_many(&persisted_cond, &times)?;

    let name = output_name(&a.output.name, &curve_in.stem);
    let mut out = OutputSet::new(&a.output.out, &name)?;
    out.write("fit.json", &to_json(&doc))?;
    out.write(
        "curve.csv",
        &tagged_curve_csv(&times, &values, Some(&curve)),
    )?;

    let mut summary = format!(
        "{} fit of {}: {}\nRSSE = {}, HFE = {}%, converged = {}",
        result.model,
        curve.label(),
        params_text(result.model, &params.values()),
        num(result.rsse),
        num(result.hfe),
        result.converged
    );
    if !doc.active_bounds.is_empty() {
        let _ = write!(summary, "\nactive bounds: {}", doc.active_bounds.join(", "));
    }
    let written = out
        .written()
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>();
    out.finish("fit", inputs, a)?;
    let _ = write!(summary, "\nwrote {}", written.join(", "));
    let warnings = result.conditions.warnings().to_vec();
    Ok(Outcome { summary, warnings })
}

#[derive(Debug, Serialize)]
struct RankedFit {
    rank: usize,
    model: String,
    converged: bool,
    rsse: f64,
    hfe_pct: f64,
    r_squared: Option<f64>,
    n_points_used: usize,
    excluded_points: usize,
    params: Map<String, Value>,
}

#[derive(Debug, Serialize)]
struct FailedFit {
    model: String,
    error: String,
}

#[derive(Debug, Serialize)]
struct ComparisonReport {
    label: String,
    conditions: ConditionsFile,
    best_model: String,
    band: Value,
    ranking: Vec<RankedFit>,
    failures: Vec<FailedFit>,
    notes: Vec<String>,
}

/// Statistics closer than this count as tied.
fn tied(best: f64, other: f64) -> bool {
    other - best <= 1e-9 * best.abs() + 1e-12
}

/// Orders fits: converged first, then RSSE, then HFE, then the declared
/// model order. RSSE and HFE differences at rounding level count as ties.
pub fn rank_fits(mut fits: Vec<FitResult>) -> Vec<FitResult> {
    let min_of = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
    let best_rsse = min_of(&mut fits.iter().filter(|f| f.converged).map(|f| f.rsse));
    let rsse_tied = |f: &FitResult| f.converged && tied(best_rsse, f.rsse);
    let best_hfe = min_of(&mut fits.iter().filter(|f| rsse_tied(f)).map(|f| f.hfe));
    let key = |f: &FitResult| {
        let r = rsse_tied(f);
        let h = r && tied(best_hfe, f.hfe);
        (
            !f.converged,
            !r,
            if r { 0.0 } else { f.rsse },
            !h,
            if h { 0.0 } else { f.hfe },
            f.model,
        )
    };
    fits.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0)
            .then(ka.1.cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
            .then(ka.3.cmp(&kb.3))
            .then(ka.4.total_cmp(&kb.4))
            .then(ka.5.cmp(&kb.5))
    });
    fits
}

/// Pointwise min/max over curves with each parameter perturbed by ±`fraction`.
pub fn envelope(
    params: &ParameterSet,
    cond: &ExperimentConditions,
    times: &[f64],
    fraction: f64,
) -> CliResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let nominal = params.evaluate_many(cond, times)?;
    let mut lower = nominal.clone();
    let mut upper = nominal.clone();
    let base = params.values();
    for i in 0..base.len() {
        for sign in [-1.0, 1.0] {
            let mut v = base.clone();
            v[i] *= 1.0 + sign * fraction;
            // Perturbations leaving the valid domain (e.g. Clark n <= 1) are skipped.
            let Ok(p) = ParameterSet::from_values(params.kind(), &v) else {
                continue;
            };
            for (k, y) in p.evaluate_many(cond, times)?.into_iter().enumerate() {
                lower[k] = lower[k].min(y);
                upper[k] = upper[k].max(y);
            }
        }
    }
    Ok((nominal, lower, upper))
}

pub fn cmd_compare(a: &CompareArgs) -> CliResult<Outcome> {
    let cond_in = load(&a.conditions, RefKind::Conditions)?;
    let cond = conditions_from(&cond_in)?;
    let curve_in = load(&a.curve, RefKind::Curve)?;
    let curve = curve_from(&curve_in, cond)?;

    let mut specs = Vec::new();
    for kind in ModelKind::ALL {
        let spec = match (kind, a.pin_n) {
            (ModelKind::Clark, Some(n)) => ModelSpec::new(kind).pin("n", n)?,
            _ => ModelSpec::new(kind),
        };
        specs.push(spec);
    }
    let results: Vec<(ModelKind, breakcurve_core::Result<FitResult>)> = std::thread::scope(|s| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| {
                let curve = &curve;
                s.spawn(move || (spec.kind(), fit(curve, spec, None, None)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fit thread panicked"))
            .collect()
    });

    let mut fits = Vec::new();
    let mut failures = Vec::new();
    let mut first_error = None;
    for (kind, r) in results {
        match r {
            Ok(f) => fits.push(f),
            Err(e) => {
                failures.push(FailedFit {
                    model: kind.name().into(),
                    error: e.to_string(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    if fits.is_empty() {
        return Err(
            first_error.map_or_else(|| CliError::Other("no models fitted".into()), Into::into)
        );
    }
    let fits = rank_fits(fits);
    let best = &fits[0];

    let times = linspace(0.0, CURVE_SPAN_FACTOR * curve.max_time(), CURVE_SAMPLES);
    let (nominal, lower, upper) =
        envelope(&best.params, curve.conditions(), &times, BAND_FRACTION)?;
    let mut csv = String::from("t_hr,ratio,lower,upper\n");
    for k in 0..times.len() {
        let _ = writeln!(csv, "{},{},{},{}", times[k], nominal[k], lower[k], upper[k]);
    }

    let mut notes = Vec::new();
    let max_ratio = curve.ratios().into_iter().fold(0.0, f64::max);
    if max_ratio < LOW_RATIO_CEILING {
        notes.push(format!(
            "low-concentration regime: all ratios are below {LOW_RATIO_CEILING}, where the wolborska model applies"
        ));
    }
    if let Some(w) = fits.iter().find(|f| f.model == ModelKind::Wolborska) {
        let saturated = w
            .params
            .evaluate(curve.conditions(), curve.max_time())
            .is_ok_and(|y| y >= 1.0);
        if saturated && max_ratio < 1.0 {
            notes.push(
                "wolborska fit reaches 1 before the last data point; it only describes the low-ratio part of the curve"
                    .into(),
            );
        }
    }
    if !best.converged {
        notes.push("no model converged; ranking uses unconverged fits".into());
    }

    let name = output_name(&a.output.name, &curve_in.stem);
    let mut out = OutputSet::new(&a.output.out, &name)?;
    let envelope_path = out.path("envelope.csv");
    let report = ComparisonReport {
        label: curve.label().to_string(),
        conditions: rounded_conditions(&curve.conditions().to_file()),
        best_model: best.model.name().into(),
        band: json!({
            "construction": BAND_CONSTRUCTION,
            "perturbation_fraction": BAND_FRACTION,
            "file": envelope_path.file_name().and_then(|s| s.to_str()).unwrap_or_default(),
        }),
        ranking: fits
            .iter()
            .enumerate()
            .map(|(i, f)| RankedFit {
                rank: i + 1,
                model: f.model.name().into(),
                converged: f.converged,
                rsse: f.rsse,
                hfe_pct: f.hfe,
                r_squared: f.r_squared,
                n_points_used: f.n_points_used,
                excluded_points: f.excluded_points,
                params: FitDocument::from_result(f).params,
            })
            .collect(),
        failures,
        notes,
    };
    out.write("compare.json", &to_json(&report))?;
    out.write("envelope.csv", &csv)?;

    let mut summary = format!(
        "{:<4} {:<12} {:>14} {:>12}  converged\n",
        "rank", "model", "rsse", "hfe_pct"
    );
    for r in &report.ranking {
        let _ = writeln!(
            summary,
            "{:<4} {:<12} {:>14} {:>12}  {}",
            r.rank,
            r.model,
            num(r.rsse),
            num(r.hfe_pct),
            r.converged
        );
    }
    for f in &report.failures {
        let _ = writeln!(summary, "failed: {}: {}", f.model, f.error);
    }
    for n in &report.notes {
        let _ = writeln!(summary, "note: {n}");
    }
    let _ = write!(summary, "best model: {}", report.best_model);
    out.finish("compare", vec![curve_in.source, cond_in.source], a)?;
    Ok(Outcome {
        summary,
        warnings: curve.conditions().warnings().to_vec(),
    })
}

pub fn cmd_correlate(a: &CorrelateArgs) -> CliResult<Outcome> {
    let mut inputs = Vec::new();
    let mut fits = Vec::new();
    for path in &a.fits {
        let (input, doc) = load_fit(path)?;
        inputs.push(input.source);
        let r = doc.to_result()?;
        if r.model != ModelKind::Thomas {
            return Err(CliError::ModelMismatch(format!(
                "{path}: {} fit, correlations need thomas fits",
                r.model
            )));
        }
        fits.push(r);
    }
    let resin = fits[0].conditions.resin_id().to_string();
    if let Some(other) = fits.iter().find(|f| f.conditions.resin_id() != resin) {
        return Err(CliError::ModelMismatch(format!(
            "mixed resins: {resin} and {}",
            other.conditions.resin_id()
        )));
    }

    let qm = match a.qm {
        Some(q) => q,
        None => average_qm(&fits)?,
    };
    let mut warnings = Vec::new();
    let kts: Vec<f64> = match &a.curves {
        Some(curves) => {
            if curves.len() != fits.len() {
                return Err(CliError::Parse(format!(
                    "{} curves given for {} fits",
                    curves.len(),
                    fits.len()
                )));
            }
            let mut kts = Vec::new();
            for (spec, f) in curves.iter().zip(&fits) {
                let input = load(spec, RefKind::Curve)?;
                inputs.push(input.source.clone());
                let curve = curve_from(&input, f.conditions.clone())?;
                kts.push(fit_fixed_qm(&curve, qm)?.thomas().expect("thomas").kt());
            }
            kts
        }
        None => fits
            .iter()
            .map(|f| {
                let p = f.thomas().expect("checked above");
                if (p.qm() - qm).abs() > 1e-9 * qm {
                    warnings.push(format!(
                        "{}: K_T taken from a fit with q_m = {} rather than the fixed {}; pass --curves to refit",
                        f.label,
                        p.qm(),
                        round_sig(qm)
                    ));
                }
                p.kt()
            })
            .collect(),
    };
    let sources: Vec<SourceExperiment> = fits
        .iter()
        .zip(&kts)
        .map(|(f, &kt)| SourceExperiment {
            ct_min: f.conditions.contact_time_min(),
            c0_ppb: f.conditions.c0_ppb(),
            kt,
        })
        .collect();

    let resin_id = a.resin.clone().unwrap_or(resin);
    let model = if a.line_ct || a.line_c0 {
        let (axis, pairs): (Axis, Vec<(f64, f64)>) = if a.line_ct {
            (
                Axis::ContactTime,
                sources.iter().map(|s| (s.ct_min, s.kt)).collect(),
            )
        } else {
            (
                Axis::InletConcentration,
                sources.iter().map(|s| (s.c0_ppb, s.kt)).collect(),
            )
        };
        let line = fit_line(&pairs).map_err(|e| match (e, axis) {
            (breakcurve_core::Error::DegenerateDesign(_), Axis::ContactTime) => {
                CliError::Degenerate(
                    "contact time not varied: need at least 2 distinct contact times".into(),
                )
            }
            (breakcurve_core::Error::DegenerateDesign(_), Axis::InletConcentration) => {
                CliError::Degenerate(
                    "inlet concentration not varied: need at least 2 distinct inlet concentrations"
                        .into(),
                )
            }
            (other, _) => other.into(),
        })?;
        CorrelationModel::from_line(resin_id, qm, axis, line, sources)?
    } else {
        CorrelationModel::from_plane(resin_id, qm, fit_plane(&sources)?, sources)?
    };
    let model = rounded_model(&model);

    let name = output_name(&a.output.name, &model.resin_id.to_lowercase());
    let mut out = OutputSet::new(&a.output.out, &name)?;
    let path = out.write("correlation.json", &(model.to_json() + "\n"))?;
    let summary = format!(
        "{}: K_T = {}*CT + {}*C0 + {} (q_m fixed at {} g/L, {} sources)\nwrote {}",
        model.resin_id,
        model.a,
        model.b,
        model.c,
        model.qm_fixed,
        model.sources.len(),
        path.display()
    );
    out.finish("correlate", inputs, a)?;
    Ok(Outcome { summary, warnings })
}

fn rounded_model(m: &CorrelationModel) -> CorrelationModel {
    CorrelationModel {
        resin_id: m.resin_id.clone(),
        qm_fixed: round_sig(m.qm_fixed),
        a: round_sig(m.a),
        b: round_sig(m.b),
        c: round_sig(m.c),
        sources: m
            .sources
            .iter()
            .map(|s| SourceExperiment {
                ct_min: round_sig(s.ct_min),
                c0_ppb: round_sig(s.c0_ppb),
                kt: round_sig(s.kt),
            })
            .collect(),
    }
}

#[derive(Debug, Serialize)]
struct TargetTime {
    ratio: f64,
    t_hr: f64,
    already_past: bool,
}

pub fn cmd_predict(a: &PredictArgs) -> CliResult<Outcome> {
    let model_in = load(&a.correlation, RefKind::Correlation)?;
    let model = CorrelationModel::from_json(&model_in.text)
        .map_err(|e| CliError::parse(&model_in.source, e))?;
    let cond_in = load(&a.conditions, RefKind::Conditions)?;
    let cond = conditions_from(&cond_in)?;
    let mut inputs = vec![model_in.source.clone(), cond_in.source.clone()];
    let mut warnings = cond.warnings().to_vec();

    if cond.resin_id() != model.resin_id {
        warnings.push(format!(
            "conditions are for {} but the correlation is for {}",
            cond.resin_id(),
            model.resin_id
        ));
    }
    let limit_ratio = breakthrough_ratio(a.limit_ppb, cond.c0_ppb())?;
    let kt = predict_kt(&model, cond.contact_time_min(), cond.c0_ppb())?;
    if !kt.in_hull {
        warnings.push(format!(
            "(CT = {} min, C0 = {} ppb) lies outside the source experiments; the correlation is extrapolated",
            round_sig(cond.contact_time_min()),
            round_sig(cond.c0_ppb())
        ));
    }
    let params = ThomasParams::new(kt.kt, model.qm_fixed)?;
    let t50 = params.t50(&cond);
    let targets = a
        .targets
        .iter()
        .map(|&r| {
            let bt = breakthrough_time(&params, &cond, r)?;
            Ok(TargetTime {
                ratio: r,
                t_hr: bt.hours,
                already_past: bt.already_past,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let limit = breakthrough_time(&params, &cond, limit_ratio)?;

    let measured = match &a.curve {
        Some(spec) => {
            let input = load(spec, RefKind::Curve)?;
            inputs.push(input.source.clone());
            Some(curve_from(&input, cond.clone())?)
        }
        None => None,
    };
    let measured_stats = match &measured {
        Some(c) => Some(assess(
            &ParameterSet::Thomas(params),
            c,
            ModelKind::Thomas.param_count(),
        )?),
        None => None,
    };

    let t_max = a.t_max.unwrap_or_else(|| {
        let data_span = measured
            .as_ref()
            .map_or(0.0, |c| CURVE_SPAN_FACTOR * c.max_time());
        (2.0 * t50).max(data_span)
    });
    if !(t_max > 0.0 && t_max.is_finite()) || a.points < 2 {
        return Err(CliError::Parse("need --t-max > 0 and --points >= 2".into()));
    }
    let times = linspace(0.0, t_max, a.points);
    let values: Vec<f64> = times
        .iter()
        .map(|&t| thomas_forward(&params, &cond, t))
        .collect();

    let name = output_name(&a.output.name, &cond_in.stem);
    let mut out = OutputSet::new(&a.output.out, &name)?;
    let csv_path = out.path("prediction.csv");
    let report = json!({
        "resin_id": model.resin_id,
        "conditions": rounded_conditions(&cond.to_file()),
        "contact_time_min": cond.contact_time_min(),
        "kt_l_per_g_hr": kt.kt,
        "qm_g_per_l": model.qm_fixed,
        "in_hull": kt.in_hull,
        "t50_hr": t50,
        "targets": targets,
        "limit": {
            "limit_ppb": a.limit_ppb,
            "ratio": limit_ratio,
            "t_hr": limit.hours,
            "already_past": limit.already_past,
        },
        "measured": measured_stats.map(|s| json!({
            "label": measured.as_ref().map(|c| c.label().to_string()),
            "rsse": s.rsse,
            "hfe_pct": s.hfe,
            "r_squared": s.r_squared,
            "n_points_used": s.used,
            "excluded_points": s.excluded,
        })),
        "warnings": &warnings,
        "curve_file": csv_path.file_name().and_then(|s| s.to_str()).unwrap_or_default(),
    });
    out.write("prediction.json", &to_json(&report))?;
    out.write(
        "prediction.csv",
        &tagged_curve_csv(&times, &values, measured.as_ref()),
    )?;

    let mut summary = format!(
        "{} at CT = {} min, C0 = {} ppb\nK_T = {} L/(g hr), q_m = {} g/L, t50 = {} hr",
        model.resin_id,
        round_sig(cond.contact_time_min()),
        round_sig(cond.c0_ppb()),
        round_sig(kt.kt),
        model.qm_fixed,
        round_sig(t50)
    );
    for t in &targets {
        let _ = write!(summary, "\nt(ratio {}) = {} hr", t.ratio, round_sig(t.t_hr));
    }
    let _ = write!(
        summary,
        "\nlimit {} ppb (ratio {}) reached at {} hr",
        a.limit_ppb,
        round_sig(limit_ratio),
        round_sig(limit.hours)
    );
    if let Some(s) = measured_stats {
        let _ = write!(
            summary,
            "\nagainst measured curve: HFE = {}%, RSSE = {}",
            num(s.hfe),
            num(s.rsse)
        );
    }
    out.finish("predict", inputs, a)?;
    Ok(Outcome { summary, warnings })
}

pub fn cmd_sensitivity(a: &SensitivityArgs) -> CliResult<Outcome> {
    let (fit_in, doc) = load_fit(&a.fit)?;
    let mut inputs = vec![fit_in.source.clone()];
    let params = doc.params()?;
    let p = *params.as_thomas().ok_or_else(|| {
        CliError::ModelMismatch(format!(
            "{}: {} fit, sensitivities need thomas",
            a.fit, doc.model
        ))
    })?;
    let cond = match &a.conditions {
        Some(spec) => {
            let input = load(spec, RefKind::Conditions)?;
            inputs.push(input.source.clone());
            conditions_from(&input)?
        }
        None => doc.conditions()?,
    };
    let f = a.perturb_pct / 100.0;
    if !(f > 0.0 && f < 1.0) {
        return Err(CliError::Parse(format!(
            "--perturb-pct {} outside (0, 100)",
            a.perturb_pct
        )));
    }
    let t50 = p.t50(&cond);
    let t_max = a.t_max.unwrap_or(2.0 * t50);
    if !(t_max > 0.0 && t_max.is_finite()) || a.points < 2 {
        return Err(CliError::Parse("need --t-max > 0 and --points >= 2".into()));
    }
    let times = linspace(0.0, t_max, a.points);
    let profile = sensitivity_profile(&p, &cond, &times)?;
    let shifted = [
        ThomasParams::new(p.kt() * (1.0 - f), p.qm())?,
        ThomasParams::new(p.kt() * (1.0 + f), p.qm())?,
        ThomasParams::new(p.kt(), p.qm() * (1.0 - f))?,
        ThomasParams::new(p.kt(), p.qm() * (1.0 + f))?,
    ];
    let mut csv = String::from("t_hr,ratio,dy_dkt,dy_dqm,kt_minus,kt_plus,qm_minus,qm_plus\n");
    for (k, &t) in times.iter().enumerate() {
        let _ = write!(
            csv,
            "{t},{},{},{}",
            thomas_forward(&p, &cond, t),
            profile.d_kt[k],
            profile.d_qm[k]
        );
        for s in &shifted {
            let _ = write!(csv, ",{}", thomas_forward(s, &cond, t));
        }
        csv.push('\n');
    }

    let name = output_name(&a.output.name, &fit_in.stem);
    let mut out = OutputSet::new(&a.output.out, &name)?;
    let path = out.write("sensitivity.csv", &csv)?;
    let summary = format!(
        "K_T = {}, q_m = {}, t50 = {} hr (dY/dK_T changes sign here)\nfinite-difference check: {:.2e}\nwrote {}",
        round_sig(p.kt()),
        round_sig(p.qm()),
        round_sig(t50),
        profile.fd_check,
        path.display()
    );
    out.finish("sensitivity", inputs, a)?;
    Ok(Outcome {
        summary,
        warnings: cond.warnings().to_vec(),
    })
}

/// Reference reproduction block of the report, as JSON.
pub fn reference_reproduction() -> CliResult<Value> {
    let refm = reference::a600e_correlation();
    let exp6 = reference::experiment(6)?.conditions()?;
    let checks = [
        (
            "experiment 6",
            exp6.contact_time_min(),
            exp6.c0_ppb(),
            1265.0,
        ),
        ("experiment 3", 0.5, 14.73, 1269.0),
    ];
    let mut eq_checks = Vec::new();
    for (what, ct, c0, expected) in checks {
        let kt = predict_kt(&refm, ct, c0)?.kt;
        eq_checks.push(json!({
            "case": what, "ct_min": ct, "c0_ppb": c0,
            "kt_l_per_g_hr": kt, "reference_kt_l_per_g_hr": expected,
            "within_1": (kt - expected).abs() <= 1.0,
        }));
    }

    let unpinned: Vec<FitResult> = A600E_SOURCE_IDS
        .iter()
        .map(|&id| reference_fit_result(id))
        .collect::<CliResult<_>>()?;
    let qm_mean = average_qm(&unpinned)?;

    let triples = reference::pinned_triples();
    let ols = fit_plane(&triples)?;
    let per_source: Vec<Value> = triples
        .iter()
        .map(|s| {
            json!({
                "ct_min": s.ct_min, "c0_ppb": s.c0_ppb, "kt_l_per_g_hr": s.kt,
                "reference_plane": refm.a * s.ct_min + refm.b * s.c0_ppb + refm.c,
                "ols_plane": ols.a * s.ct_min + ols.b * s.c0_ppb + ols.c,
            })
        })
        .collect();

    let a520e = reference::a520e_correlation();
    let line = fit_line(
        &a520e
            .sources
            .iter()
            .map(|s| (s.ct_min, s.kt))
            .collect::<Vec<_>>(),
    )?;

    let pred = predict_kt(&refm, exp6.contact_time_min(), exp6.c0_ppb())?;
    let p6 = ThomasParams::new(pred.kt, refm.qm_fixed)?;
    let limit = breakthrough_time(
        &p6,
        &exp6,
        breakthrough_ratio(DEFAULT_LIMIT_PPB, exp6.c0_ppb())?,
    )?;

    Ok(json!({
        "a600e_correlation_checks": eq_checks,
        "qm_average": {
            "experiments": A600E_SOURCE_IDS,
            "mean_g_per_l": qm_mean,
            "reference_g_per_l": A600E_QM,
        },
        "a600e_plane": {
            "reference": {"a_per_min": refm.a, "b_per_ppb": refm.b, "c": refm.c},
            "ols_refit": {"a_per_min": ols.a, "b_per_ppb": ols.b, "c": ols.c},
            "per_source": per_source,
            "note": "the reference plane does not pass through the fixed-q_m K_T values at contact time 0.75 min; both coefficient sets are reported",
        },
        "a520e_line": {
            "reference": {"a_per_min": a520e.a, "c": a520e.c},
            "refit": {"a_per_min": line.slope, "c": line.intercept},
        },
        "experiment6_prediction": {
            "kt_l_per_g_hr": pred.kt,
            "t50_hr": p6.t50(&exp6),
            "limit_ppb": DEFAULT_LIMIT_PPB,
            "limit_t_hr": limit.hours,
        },
    }))
}

fn reference_fit_result(id: u8) -> CliResult<FitResult> {
    let p = reference::unpinned_fit(id)?;
    let cond = reference::experiment(id)?.conditions()?;
    Ok(FitResult {
        model: ModelKind::Thomas,
        params: ParameterSet::Thomas(p),
        rsse: f64::NAN,
        hfe: f64::NAN,
        hfe_param_count: 2,
        r_squared: None,
        n_points_used: 0,
        excluded_points: 0,
        pinned: vec![false; 2],
        bounds: None,
        active_bounds: vec![false; 2],
        converged: true,
        iterations: 0,
        conditions: cond,
        label: format!("exp{id}"),
    })
}

pub fn cmd_report(a: &ReportArgs) -> CliResult<Outcome> {
    let repro = reference_reproduction()?;
    let mut inputs = Vec::new();
    let mut rows = Vec::new();
    for path in &a.fits {
        let (input, doc) = load_fit(path)?;
        inputs.push(input.source);
        rows.push(json!({
            "label": doc.label, "model": doc.model, "params": doc.params,
            "rsse": doc.rsse, "hfe_pct": doc.hfe_pct, "r_squared": doc.r_squared,
            "converged": doc.converged, "active_bounds": doc.active_bounds,
        }));
    }
    let report = json!({ "reference": repro, "fits": rows });

    let name = output_name(&a.output.name, "report");
    let mut out = OutputSet::new(&a.output.out, &name)?;
    out.write("report.json", &to_json(&report))?;

    let r = |v: &Value| v.as_f64().map_or("-".into(), num);
    let mut s = String::from("reference reproduction\n");
    for c in repro["a600e_correlation_checks"]
        .as_array()
        .into_iter()
        .flatten()
    {
        let _ = writeln!(
            s,
            "  A600E K_T at {}: {} (reference {})",
            c["case"].as_str().unwrap_or_default(),
            r(&c["kt_l_per_g_hr"]),
            r(&c["reference_kt_l_per_g_hr"])
        );
    }
    let _ = writeln!(
        s,
        "  mean q_m over A600E sources: {} (reference {})",
        r(&repro["qm_average"]["mean_g_per_l"]),
        A600E_QM
    );
    let plane = &repro["a600e_plane"];
    let _ = writeln!(
        s,
        "  A600E plane reference: a = {}, b = {}, c = {}",
        r(&plane["reference"]["a_per_min"]),
        r(&plane["reference"]["b_per_ppb"]),
        r(&plane["reference"]["c"])
    );
    let _ = writeln!(
        s,
        "  A600E plane OLS refit: a = {}, b = {}, c = {}",
        r(&plane["ols_refit"]["a_per_min"]),
        r(&plane["ols_refit"]["b_per_ppb"]),
        r(&plane["ols_refit"]["c"])
    );
    let _ = writeln!(
        s,
        "  {:>7} {:>7} {:>9} {:>10} {:>10}",
        "CT", "C0", "K_T", "reference", "OLS"
    );
    for p in plane["per_source"].as_array().into_iter().flatten() {
        let _ = writeln!(
            s,
            "  {:>7} {:>7} {:>9} {:>10.1} {:>10.1}",
            r(&p["ct_min"]),
            r(&p["c0_ppb"]),
            r(&p["kt_l_per_g_hr"]),
            p["reference_plane"].as_f64().unwrap_or(f64::NAN),
            p["ols_plane"].as_f64().unwrap_or(f64::NAN)
        );
    }
    let e6 = &repro["experiment6_prediction"];
    let _ = write!(
        s,
        "  experiment 6: K_T = {}, t50 = {} hr, {} ppb reached at {} hr",
        r(&e6["kt_l_per_g_hr"]),
        r(&e6["t50_hr"]),
        DEFAULT_LIMIT_PPB,
        r(&e6["limit_t_hr"])
    );
    if !rows.is_empty() {
        let _ = write!(
            s,
            "\nfits\n  {:<20} {:<12} {:>14} {:>12}",
            "label", "model", "rsse", "hfe_pct"
        );
        for row in &rows {
            let _ = write!(
                s,
                "\n  {:<20} {:<12} {:>14} {:>12}",
                row["label"].as_str().unwrap_or_default(),
                row["model"].as_str().unwrap_or_default(),
                r(&row["rsse"]),
                r(&row["hfe_pct"])
            );
        }
    }
    out.finish("report", inputs, a)?;
    Ok(Outcome {
        summary: s,
        warnings: Vec::new(),
    })
}
