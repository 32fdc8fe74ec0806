use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use weyl_core::spectral::{self, sturm_count};
use weyl_core::{
    GeometryModel, MeshControl, PotentialModel, QuadratureSettings, TridiagonalOperator,
};

fn sturm(c: &mut Criterion) {
    let mut group = c.benchmark_group("sturm_count");
    let mut rng = StdRng::seed_from_u64(7);
    for n in [1_000usize, 100_000] {
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-5.0..5.0)).collect();
        let t = TridiagonalOperator::from_parts(diag, off).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &t, |b, t| {
            b.iter(|| sturm_count(t, black_box(0.5)))
        });
    }
    group.finish();
}

fn bracketed_counts(c: &mut Criterion) {
    let mut group = c.benchmark_group("count");
    group.sample_size(10);
    let mesh = MeshControl::default();
    let cases = [
        (
            "line_x2_100",
            GeometryModel::line(),
            PotentialModel::harmonic_oscillator(),
            100.0,
        ),
        (
            "cylinder_x2_50",
            GeometryModel::cylinder(),
            PotentialModel::harmonic_oscillator(),
            50.0,
        ),
        (
            "h3_r2_17",
            GeometryModel::hyperbolic3(),
            PotentialModel::power(2.0).unwrap(),
            17.0,
        ),
        (
            "line_sqrtlog_3",
            GeometryModel::line(),
            PotentialModel::log_power(1.0, 0.5).unwrap(),
            3.0,
        ),
    ];
    for (name, g, v, lambda) in cases {
        group.bench_function(name, |b| {
            b.iter(|| spectral::count(&g, &v, black_box(lambda), &mesh).unwrap())
        });
    }
    group.finish();
}

fn weyl_integral(c: &mut Criterion) {
    let s = QuadratureSettings::default();
    let v = PotentialModel::log_power(1.0, 2.0).unwrap();
    let g = GeometryModel::cylinder();
    c.bench_function("phi_cylinder_log2_200", |b| {
        b.iter(|| weyl_core::phase::phi(&g, &v, black_box(200.0), &s).unwrap())
    });
}

criterion_group!(benches, sturm, bracketed_counts, weyl_integral);
criterion_main!(benches);
