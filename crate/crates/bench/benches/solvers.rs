//! Per-step solver throughput on desk-scale instances.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nsa_bench::{lasso_fixture, least_squares_fixture};
use nsa_core::solvers::{run, Method, MethodConfig};

fn bench_nsa_steps(c: &mut Criterion) {
    let (problem, x0) = least_squares_fixture(400, 200, 1);
    let cfg = MethodConfig::new(Method::Nsa).with_eta_fraction(2.0 / 3.0);
    c.bench_function("nsa_100_steps_400x200", |b| {
        b.iter(|| run(black_box(&cfg), black_box(&problem), black_box(&x0), 100, 0).unwrap())
    });
}

fn bench_composite_steps(c: &mut Criterion) {
    let (problem, x0) = lasso_fixture(200, 100, 2);
    let cfg = MethodConfig::new(Method::NsaComposite).with_eta_fraction(1.0);
    c.bench_function("nsa_composite_100_steps_200x100", |b| {
        b.iter(|| run(black_box(&cfg), black_box(&problem), black_box(&x0), 100, 0).unwrap())
    });
}

fn bench_fista_steps(c: &mut Criterion) {
    let (problem, x0) = lasso_fixture(200, 100, 3);
    let cfg = MethodConfig::new(Method::Fista).with_eta_fraction(1.0);
    c.bench_function("fista_100_steps_200x100", |b| {
        b.iter(|| run(black_box(&cfg), black_box(&problem), black_box(&x0), 100, 0).unwrap())
    });
}

criterion_group! {
    name = solver_steps;
    config = Criterion::default().sample_size(20);
    targets = bench_nsa_steps, bench_composite_steps, bench_fista_steps
}
criterion_main!(solver_steps);
