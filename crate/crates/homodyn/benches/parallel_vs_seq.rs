//! Side-by-side timings of the sequential and rayon code paths for the four
//! operations that have both. Run with `cargo bench`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use homodyn::entropy::{entropy_rate_par, entropy_rate_seq, SymbolicSystem};
use homodyn::hyperbolic::{haar_sample_par, haar_sample_seq};
use homodyn::quadforms::QuadraticForm;

fn counting(c: &mut Criterion) {
    let q = QuadraticForm::diagonal(&[1.0, 1.0, 1.0, -2f64.sqrt()]).unwrap();
    let mut g = c.benchmark_group("count_values");
    for radius in [10.0, 20.0] {
        g.bench_with_input(BenchmarkId::new("seq", radius), &radius, |b, &r| {
            b.iter(|| q.count_values_seq(-1.0, 1.0, black_box(r)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("par", radius), &radius, |b, &r| {
            b.iter(|| q.count_values_par(-1.0, 1.0, black_box(r)).unwrap())
        });
    }
    g.finish();
}

fn oppenheim(c: &mut Criterion) {
    let q = homodyn::quadforms::parse_form("1,-sqrt2/2,0,0,0,sqrt3").unwrap();
    let mut g = c.benchmark_group("oppenheim_search");
    // a target whose first witness sits deep in the box
    let (r, eps, n_box) = (-0.8, 0.01, 200);
    g.bench_function("seq", |b| {
        b.iter(|| q.oppenheim_search_seq(black_box(r), eps, n_box).unwrap())
    });
    g.bench_function("par", |b| {
        b.iter(|| q.oppenheim_search_par(black_box(r), eps, n_box).unwrap())
    });
    g.finish();
}

fn entropy(c: &mut Criterion) {
    let sys = SymbolicSystem::Rotation(3f64.sqrt() / 100.0);
    let mut g = c.benchmark_group("entropy_rate_rotation");
    g.bench_function("seq", |b| {
        b.iter(|| entropy_rate_seq(black_box(&sys), 400).unwrap())
    });
    g.bench_function("par", |b| {
        b.iter(|| entropy_rate_par(black_box(&sys), 400).unwrap())
    });
    g.finish();
}

fn haar(c: &mut Criterion) {
    let mut g = c.benchmark_group("haar_sample");
    g.bench_function("seq", |b| b.iter(|| haar_sample_seq(black_box(20_000), 7)));
    g.bench_function("par", |b| b.iter(|| haar_sample_par(black_box(20_000), 7)));
    g.finish();
}

criterion_group!(benches, counting, oppenheim, entropy, haar);
criterion_main!(benches);
