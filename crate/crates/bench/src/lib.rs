//! Benchmark bodies; `benches/` only registers them with criterion.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spd_radial::{
    busemann, frechet_median, quantile, radial_field, radial_field_oracle, sample, BoundaryDirection, Dataset,
    OptimizerConfig, QuantileIndex, SpdPoint,
};

fn instance(m: usize, seed: u64) -> (BoundaryDirection, SpdPoint) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = sample::spd(&mut rng, m, 1e2);
    let z = sample::unit_tangent(&mut rng, &p);
    let x = sample::spd(&mut rng, m, 1e2);
    (BoundaryDirection::new(p, z).expect("unit tangent"), x)
}

fn dataset(n: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Dataset::new((0..n).map(|_| sample::spd(&mut rng, m, 1e1)).collect()).expect("uniform dimension")
}

pub fn radial(c: &mut Criterion) {
    let mut group = c.benchmark_group("radial_field");
    for m in [2, 3, 6] {
        let (xi, x) = instance(m, m as u64);
        group.bench_with_input(BenchmarkId::new("closed_form", m), &m, |b, _| {
            b.iter(|| radial_field(black_box(&xi), black_box(&x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("oracle_t200", m), &m, |b, _| {
            b.iter(|| radial_field_oracle(black_box(&xi), black_box(&x), 200.0).unwrap())
        });
    }
    group.finish();

    let (xi, x) = instance(3, 99);
    c.bench_function("busemann/m3", |b| b.iter(|| busemann(black_box(&xi), black_box(&x), 1e-5).unwrap()));
}

pub fn quantiles(c: &mut Criterion) {
    let mut group = c.benchmark_group("quantile");
    group.sample_size(10);
    let cfg = OptimizerConfig::default();
    for n in [25, 100] {
        let data = dataset(n, 3, n as u64);
        let (xi, _) = instance(3, 7);
        let index = QuantileIndex::new(0.6, xi).unwrap();
        group.bench_with_input(BenchmarkId::new("median", n), &n, |b, _| {
            b.iter(|| frechet_median(black_box(&data), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("beta0.6", n), &n, |b, _| {
            b.iter(|| quantile(black_box(&data), &index, &cfg).unwrap())
        });
    }
    group.finish();
}
