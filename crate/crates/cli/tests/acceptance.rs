//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use breakcurve_cli::commands::reference_reproduction;
use breakcurve_core::reference::{self, A600E_SOURCE_IDS, UNPINNED_FITS};
use breakcurve_core::{
    average_qm, breakthrough_time, fit, fit_plane, linspace, predict_kt, sensitivity_kt,
    sensitivity_qm, thomas_forward, yoon_nelson_forward, Bounds, BreakthroughCurve,
    ExperimentConditions, FitResult, ModelKind, ModelSpec, ParameterSet, SourceExperiment,
    ThomasParams, YoonNelsonParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn table_params() -> Vec<(u8, ThomasParams, ExperimentConditions)> {
    UNPINNED_FITS
        .iter()
        .map(|&(id, _, _)| {
            let p = reference::unpinned_fit(id).unwrap();
            let c = reference::experiment(id).unwrap().conditions().unwrap();
            (id, p, c)
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Independent root finder for `thomas_forward(t) = target`.
fn bisect(p: &ThomasParams, c: &ExperimentConditions, target: f64) -> f64 {
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if thomas_forward(p, c, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ac1() -> Check {
    let m = reference::a600e_correlation();
    let start = Instant::now();
    let kt = predict_kt(&m, 0.75, 20.65).map_err(|e| e.to_string())?.kt;
    let elapsed = start.elapsed();
    ensure(
        (kt - 1264.8).abs() < 0.05 && (kt - 1265.0).abs() <= 1.0,
        || format!("K_T = {kt}"),
    )?;
    within_time(elapsed, Duration::from_millis(1))?;
    Ok(format!("K_T = {kt:.4}, {elapsed:?}"))
}

fn ac2() -> Check {
    let kt = predict_kt(&reference::a600e_correlation(), 0.5, 14.73)
        .map_err(|e| e.to_string())?
        .kt;
    ensure(
        (kt - 1268.9).abs() < 0.05 && (kt - 1269.0).abs() <= 1.0,
        || format!("K_T = {kt}"),
    )?;
    Ok(format!("K_T = {kt:.4}"))
}

fn ac3() -> Check {
    let fits: Vec<FitResult> = A600E_SOURCE_IDS
        .iter()
        .map(|&id| {
            let curve = reference::synthetic_curve(id, 30).unwrap();
            let p = reference::unpinned_fit(id).unwrap();
            // A full fit result carrying the tabulated parameters.
            let mut r = breakcurve_core::fit_fixed_qm(&curve, p.qm()).unwrap();
            r.params = ParameterSet::Thomas(p);
            r
        })
        .collect();
    let mean = average_qm(&fits).map_err(|e| e.to_string())?;
    let hand = (0.3828 + 0.2549 + 0.2091 + 0.1687) / 4.0;
    ensure((mean - hand).abs() < 1e-12, || {
        format!("mean {mean} vs {hand}")
    })?;
    ensure(
        (mean - 0.2539).abs() < 5e-5 && (mean - 0.254).abs() <= 0.001,
        || format!("mean {mean}"),
    )?;
    Ok(format!("mean q_m = {mean:.6}"))
}

fn ac4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let id = rng.random_range(1..=8u8);
        let c = reference::experiment(id).unwrap().conditions().unwrap();
        let kt = 10f64.powf(rng.random_range(1.0..4.0));
        let qm = 10f64.powf(rng.random_range(-2.0..0.0));
        let p = ThomasParams::new(kt, qm).unwrap();
        let yn = YoonNelsonParams::new(kt * c.c0(), qm * c.contact_time() / c.c0()).unwrap();
        for t in linspace(0.0, 3.0 * p.t50(&c), 1000) {
            worst = worst.max(rel(thomas_forward(&p, &c, t), yoon_nelson_forward(&yn, t)));
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || {
        format!("worst relative difference {worst:e}")
    })?;
    within_time(elapsed, Duration::from_secs(1))?;
    Ok(format!("worst {worst:.1e}, {elapsed:?}"))
}

fn ac5() -> Check {
    let mut worst = 0.0f64;
    for (id, p, c) in table_params() {
        for target in [0.01, 0.1, 0.5, 0.9] {
            let t = breakthrough_time(&p, &c, target)
                .map_err(|e| e.to_string())?
                .hours;
            let y = thomas_forward(&p, &c, t);
            let err = (y - target).abs() / target;
            ensure(err <= 1e-9, || format!("exp {id} target {target}: {y}"))?;
            worst = worst.max(err);
        }
    }
    let (p, c) = (
        reference::unpinned_fit(1).unwrap(),
        reference::experiment(1).unwrap().conditions().unwrap(),
    );
    let t50 = p.t50(&c);
    let oracle = bisect(&p, &c, 0.5);
    ensure((t50 - 324.85).abs() < 0.005, || format!("t50 = {t50}"))?;
    ensure(rel(t50, oracle) <= 1e-9, || {
        format!("t50 {t50} vs bisection {oracle}")
    })?;
    Ok(format!(
        "round-trip worst {worst:.1e}; t50 = {t50:.4} hr, bisection {oracle:.4}"
    ))
}

fn ac6() -> Check {
    let mut worst = 0.0f64;
    for (id, p, c) in table_params() {
        let hk = 1e-4 * p.kt();
        let hq = 1e-4 * p.qm();
        let f =
            |kt: f64, qm: f64, t: f64| thomas_forward(&ThomasParams::new(kt, qm).unwrap(), &c, t);
        let times = linspace(0.0, 2.0 * p.t50(&c), 20);
        let dk: Vec<f64> = times.iter().map(|&t| sensitivity_kt(&p, &c, t)).collect();
        let dq: Vec<f64> = times.iter().map(|&t| sensitivity_qm(&p, &c, t)).collect();
        let fk: Vec<f64> = times
            .iter()
            .map(|&t| (f(p.kt() + hk, p.qm(), t) - f(p.kt() - hk, p.qm(), t)) / (2.0 * hk))
            .collect();
        let fq: Vec<f64> = times
            .iter()
            .map(|&t| (f(p.kt(), p.qm() + hq, t) - f(p.kt(), p.qm() - hq, t)) / (2.0 * hq))
            .collect();
        for (a, n) in [(&dk, &fk), (&dq, &fq)] {
            let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(n.iter()) {
                let e = (x - y).abs() / x.abs().max(1e-3 * peak);
                worst = worst.max(e);
            }
        }
        ensure(worst <= 1e-5, || {
            format!("exp {id}: finite-difference mismatch {worst:e}")
        })?;
        let at_t50 = sensitivity_kt(&p, &c, p.t50(&c));
        ensure(at_t50.abs() <= 1e-12, || {
            format!("exp {id}: dY/dK_T(t50) = {at_t50:e}")
        })?;
        for t in linspace(0.0, 3.0 * p.t50(&c), 1000) {
            let d = sensitivity_qm(&p, &c, t);
            ensure(d <= 0.0, || format!("exp {id}: dY/dq_m({t}) = {d}"))?;
        }
    }
    Ok(format!("worst relative deviation {worst:.1e}"))
}

fn noisy(curve: &BreakthroughCurve, rng: &mut ChaCha8Rng) -> BreakthroughCurve {
    let noise = Normal::new(0.0, 0.02).unwrap();
    let ratios: Vec<f64> = curve
        .ratios()
        .iter()
        .map(|y| (y * (1.0 + noise.sample(rng))).clamp(0.0, 1.0))
        .collect();
    BreakthroughCurve::from_series(&curve.times(), &ratios, curve.conditions().clone(), "noisy")
        .unwrap()
}

fn ac7() -> Check {
    let start = Instant::now();
    let spec = ModelSpec::new(ModelKind::Thomas);
    let (mut clean_worst, mut noisy_worst) = (0.0f64, 0.0f64);
    for (id, p, _) in table_params() {
        let curve = reference::synthetic_curve(id, 30).unwrap();
        let r = fit(&curve, &spec, None, None).map_err(|e| e.to_string())?;
        let q = r.thomas().unwrap();
        let e = rel(q.kt(), p.kt()).max(rel(q.qm(), p.qm()));
        ensure(e <= 1e-3, || {
            format!("exp {id} noiseless: K_T {} q_m {}", q.kt(), q.qm())
        })?;
        clean_worst = clean_worst.max(e);

        let mut rng = ChaCha8Rng::seed_from_u64(7 + id as u64);
        let r = fit(&noisy(&curve, &mut rng), &spec, None, None).map_err(|e| e.to_string())?;
        let q = r.thomas().unwrap();
        let e = rel(q.kt(), p.kt()).max(rel(q.qm(), p.qm()));
        ensure(e <= 0.1, || {
            format!("exp {id} noisy: K_T {} q_m {}", q.kt(), q.qm())
        })?;
        noisy_worst = noisy_worst.max(e);
    }
    let elapsed = start.elapsed();
    within_time(elapsed, Duration::from_secs(10))?;
    Ok(format!(
        "noiseless {clean_worst:.1e}, 2% noise {noisy_worst:.3}, {elapsed:?}"
    ))
}

fn ac8() -> Check {
    let curve = reference::synthetic_curve(4, 30).unwrap();
    let center = ParameterSet::Thomas(reference::unpinned_fit(1).unwrap());
    let bounds = Bounds::around(&center, 0.3).map_err(|e| e.to_string())?;
    let r = fit(
        &curve,
        &ModelSpec::new(ModelKind::Thomas),
        Some(&center),
        Some(&bounds),
    )
    .map_err(|e| e.to_string())?;
    let active: Vec<&str> = ModelKind::Thomas
        .param_symbols()
        .iter()
        .zip(&r.active_bounds)
        .filter(|(_, a)| **a)
        .map(|(s, _)| *s)
        .collect();
    ensure(!active.is_empty(), || {
        format!("no active bound at {:?}", r.params.values())
    })?;
    Ok(format!("active: {}", active.join(", ")))
}

/// Cramer's rule on the 3x3 normal equations `[CT C0 1]`.
fn normal_equations(t: &[SourceExperiment]) -> [f64; 3] {
    let rows: Vec<[f64; 3]> = t.iter().map(|s| [s.ct_min, s.c0_ppb, 1.0]).collect();
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for (r, s) in rows.iter().zip(t) {
        for i in 0..3 {
            v[i] += r[i] * s.kt;
            for j in 0..3 {
                m[i][j] += r[i] * r[j];
            }
        }
    }
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = v[i];
        }
        *o = det(mk) / d;
    }
    out
}

fn ac9() -> Check {
    let coplanar: Vec<SourceExperiment> = reference::pinned_triples()
        .iter()
        .map(|s| SourceExperiment {
            kt: -264.0 * s.ct_min + 10.45 * s.c0_ppb + 1247.0,
            ..*s
        })
        .collect();
    let p = fit_plane(&coplanar).map_err(|e| e.to_string())?;
    for (got, want) in [(p.a, -264.0), (p.b, 10.45), (p.c, 1247.0)] {
        ensure(rel(got, want) <= 1e-9, || {
            format!("coplanar: {got} vs {want}")
        })?;
    }
    let table = reference::pinned_triples();
    let ols = fit_plane(&table).map_err(|e| e.to_string())?;
    let oracle = normal_equations(&table);
    for (got, want) in [(ols.a, oracle[0]), (ols.b, oracle[1]), (ols.c, oracle[2])] {
        ensure(rel(got, want) <= 1e-9, || {
            format!("table: {got} vs oracle {want}")
        })?;
    }
    let report = reference_reproduction().map_err(|e| e.to_string())?;
    let plane = &report["a600e_plane"];
    ensure(
        plane["reference"]["a_per_min"].as_f64() == Some(-264.0),
        || "report lacks reference plane".into(),
    )?;
    ensure(
        plane["ols_refit"]["a_per_min"]
            .as_f64()
            .is_some_and(|a| rel(a, ols.a) <= 1e-9),
        || "report lacks OLS refit".into(),
    )?;
    Ok(format!(
        "coplanar exact; table OLS ({:.4}, {:.4}, {:.4}) vs reference (-264, 10.45, 1247), divergence reported",
        ols.a, ols.b, ols.c
    ))
}

fn ac10() -> Check {
    let p = reference::unpinned_fit(1).unwrap();
    let spec = ModelSpec::new(ModelKind::Thomas);
    let mut fitted = Vec::new();
    for id in [1u8, 2] {
        let c = reference::experiment(id).unwrap().conditions().unwrap();
        let times = linspace(0.0, 2.0 * p.t50(&c), 30);
        let ratios: Vec<f64> = times.iter().map(|&t| thomas_forward(&p, &c, t)).collect();
        let curve = BreakthroughCurve::from_series(&times, &ratios, c, format!("exp{id}")).unwrap();
        fitted.push(
            fit(&curve, &spec, None, None)
                .map_err(|e| e.to_string())?
                .params
                .values(),
        );
    }
    let worst = fitted[0]
        .iter()
        .zip(&fitted[1])
        .map(|(a, b)| rel(*a, *b))
        .fold(0.0, f64::max);
    ensure(worst <= 1e-9, || {
        format!("{:?} vs {:?}", fitted[0], fitted[1])
    })?;
    Ok(format!("max relative difference {worst:.1e}"))
}

fn ac11() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_breakcurve"))
            .env_remove("BREAKCURVE_DATA")
            .args([
                "fit",
                "--curve",
                "ref:exp3",
                "--conditions",
                "ref:exp3",
                "--model",
                "thomas",
                "--out",
            ])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        let json = std::fs::read(out.join("exp3.fit.json")).map_err(|e| e.to_string())?;
        let csv = std::fs::read(out.join("exp3.curve.csv")).map_err(|e| e.to_string())?;
        outputs.push((json, csv));
    }
    ensure(outputs[0].0 == outputs[1].0, || {
        "fit.json differs between runs".into()
    })?;
    ensure(outputs[0].1 == outputs[1].1, || {
        "curve.csv differs between runs".into()
    })?;
    Ok(format!("{} bytes identical", outputs[0].0.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("AC-1", "A600E correlation at experiment 6 conditions", ac1),
        ("AC-2", "A600E correlation at experiment 3 conditions", ac2),
        ("AC-3", "q_m average over A600E sources", ac3),
        ("AC-4", "Thomas / Yoon-Nelson equivalence", ac4),
        ("AC-5", "breakthrough-time inversion", ac5),
        ("AC-6", "analytic sensitivities", ac6),
        ("AC-7", "fit round-trip on synthetic curves", ac7),
        ("AC-8", "bound activation in a ±30% box", ac8),
        ("AC-9", "plane-fit exactness", ac9),
        ("AC-10", "scale invariance", ac10),
        ("AC-11", "CLI determinism", ac11),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match result {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
