use std::hint::black_box;

use breakcurve_bench::{curve, thomas_case};
use breakcurve_core::reference::{self, A600E_QM};
use breakcurve_core::{
    fit, fit_fixed_qm, fit_plane, linspace, thomas_forward, ModelKind, ModelSpec,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn forward(c: &mut Criterion) {
    let (p, cond) = thomas_case(1);
    let times = linspace(0.0, 3.0 * p.t50(&cond), 1000);
    c.bench_function("thomas_forward_1000", |b| {
        b.iter(|| {
            times
                .iter()
                .map(|&t| thomas_forward(&p, &cond, black_box(t)))
                .sum::<f64>()
        })
    });
}

fn fitting(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    let data = curve(3, 30);
    for kind in ModelKind::ALL {
        let spec = ModelSpec::new(kind);
        group.bench_with_input(
            BenchmarkId::from_parameter(kind.name()),
            &spec,
            |b, spec| b.iter(|| fit(black_box(&data), spec, None, None).unwrap()),
        );
    }
    group.bench_function("thomas_fixed_qm", |b| {
        b.iter(|| fit_fixed_qm(black_box(&data), A600E_QM).unwrap())
    });
    group.finish();
}

fn plane(c: &mut Criterion) {
    let triples = reference::pinned_triples();
    c.bench_function("fit_plane", |b| {
        b.iter(|| fit_plane(black_box(&triples)).unwrap())
    });
}

criterion_group!(benches, forward, fitting, plane);
criterion_main!(benches);
