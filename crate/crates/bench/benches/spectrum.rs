use std::hint::black_box;

use aqrm_core::spectrum::{
    crossing_scan, discover_symmetry, eigensolve, eigenvalues, truncated_hamiltonian, NumericParams, ScanConfig,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn eigen(c: &mut Criterion) {
    let h = truncated_hamiltonian(&NumericParams::new(0.8, 0.7, 0.5), 60).matrix;
    let mut group = c.benchmark_group("eigen N=60");
    group.bench_function("jacobi with vectors", |b| b.iter(|| eigensolve(black_box(&h)).unwrap()));
    group.bench_function("values only", |b| b.iter(|| eigenvalues(black_box(&h)).unwrap()));
    group.finish();
}

fn discovery(c: &mut Criterion) {
    let mut group = c.benchmark_group("discover");
    group.sample_size(20);
    for (eps, d) in [(0.5, 1), (1.0, 2), (1.5, 3)] {
        let p = NumericParams::new(0.8, 0.7, eps);
        group.bench_function(format!("eps={} D={}", eps, d), |b| {
            b.iter(|| discover_symmetry(black_box(&p), d, 40).unwrap())
        });
    }
    group.finish();
}

fn scan(c: &mut Criterion) {
    let mut cfg = ScanConfig::new(0.5, 0.7, 0.3, 0.7);
    cfg.steps = 40;
    cfg.n = 40;
    cfg.levels = 6;
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    group.bench_function("41 points N=40", |b| b.iter(|| crossing_scan(black_box(&cfg)).unwrap()));
    group.finish();
}

criterion_group!(benches, eigen, discovery, scan);
criterion_main!(benches);
