use std::hint::black_box;

use aqrm_core::block::{build_hamiltonian, j_catalog, recurrence_check, verify_jsquared};
use aqrm_core::genfun::derive_symmetry;
use aqrm_core::scalar::{rat, rat_int};
use aqrm_core::{Basis, ModelParams};
use criterion::{criterion_group, criterion_main, Criterion};

fn products(c: &mut Criterion) {
    let p = ModelParams::symbolic(rat_int(1));
    let j = j_catalog(&p, Basis::Original).unwrap();
    let h = build_hamiltonian(&p);
    c.bench_function("commutator J(1) H symbolic", |b| b.iter(|| black_box(&j).commutator(black_box(&h))));
    c.bench_function("J(1)^2 symbolic", |b| b.iter(|| black_box(&j).product(black_box(&j))));
    c.bench_function("verify J^2 at 1/2", |b| {
        b.iter(|| verify_jsquared(black_box(&ModelParams::symbolic(rat(1, 2)))).unwrap())
    });
    let numeric = ModelParams::numeric(rat(4, 5), rat(7, 10), rat_int(1));
    let jn = j_catalog(&numeric, Basis::Original).unwrap();
    c.bench_function("recurrence check bound 12", |b| b.iter(|| recurrence_check(black_box(&jn), &numeric, 12)));
}

fn derivation(c: &mut Criterion) {
    let mut group = c.benchmark_group("derive");
    group.sample_size(20);
    for m in 0..=2 {
        group.bench_function(format!("M={}", m), |b| b.iter(|| derive_symmetry(black_box(m), None).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, products, derivation);
criterion_main!(benches);
