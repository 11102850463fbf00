use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hardy_copson::bestconst::{estimate_best_constant, OptimizerConfig, Target};
use hardy_copson::quad::integrate;
use hardy_copson::{build_covering, conditions_report, lhs_main, lhs_sup, Exponents, QuadConfig, TestFunction, WeightSpec};

fn weights() -> (WeightSpec, WeightSpec, WeightSpec) {
    (
        WeightSpec::exp_scaled(3.0, 0.0, 1.0).unwrap(),
        WeightSpec::constant(1.0).unwrap(),
        WeightSpec::exp_scaled(1.0, 0.0, 1.0).unwrap(),
    )
}

fn quadrature(c: &mut Criterion) {
    let cfg = QuadConfig::default();
    c.bench_function("integrate t^-1/2 e^-t on (0,inf)", |b| {
        b.iter(|| integrate(|t| t.powf(-0.5) * (-t).exp(), 0.0, f64::INFINITY, &[], black_box(&cfg)).unwrap())
    });
}

fn covering(c: &mut Criterion) {
    let (u, _, _) = weights();
    let cfg = QuadConfig::default();
    c.bench_function("build_covering k in [-20, 1]", |b| {
        b.iter(|| build_covering(black_box(&u), -20, 20, false, &cfg).unwrap())
    });
}

fn functionals(c: &mut Criterion) {
    let (u, _, w) = weights();
    let cfg = QuadConfig::default();
    let h = TestFunction::new(vec![0.1, 0.5, 2.0, 7.0], vec![1.0, 3.0, 0.5]).unwrap();
    c.bench_function("lhs_main q=2 r=1", |b| b.iter(|| lhs_main(black_box(&h), &u, &w, 2.0, 1.0, &cfg).unwrap()));
    c.bench_function("lhs_sup q=2 r=1", |b| b.iter(|| lhs_sup(black_box(&h), &u, &w, 2.0, 1.0, &cfg).unwrap()));
}

fn conditions(c: &mut Criterion) {
    let (u, v, w) = weights();
    let cfg = QuadConfig::default();
    let cs = build_covering(&u, -20, 20, false, &cfg).unwrap();
    let mut g = c.benchmark_group("conditions_report");
    g.sample_size(10);
    for (p, q, r) in [(2.0, 2.0, 2.0), (3.0, 1.0, 0.5)] {
        let e = Exponents::new(p, q, r).unwrap();
        g.bench_function(format!("p={p} q={q} r={r}"), |b| {
            b.iter(|| conditions_report(&u, &v, &w, black_box(&e), Some(&cs), &cfg).unwrap())
        });
    }
    g.finish();
}

fn estimate(c: &mut Criterion) {
    let (u, v, w) = weights();
    let cfg = QuadConfig::default();
    let e = Exponents::new(2.0, 2.0, 2.0).unwrap();
    let opt = OptimizerConfig { cells: 16, restarts: 2, ..OptimizerConfig::default() };
    let mut g = c.benchmark_group("estimate_best_constant");
    g.sample_size(10);
    for target in [Target::Main, Target::Sup, Target::Discrete] {
        g.bench_function(target.to_string(), |b| {
            b.iter(|| estimate_best_constant(&u, &v, &w, &e, target, black_box(&opt), &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, quadrature, covering, functionals, conditions, estimate);
criterion_main!(benches);
