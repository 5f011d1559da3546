use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tamperlab_bench::{density, BENCH_SEED};
use tamperlab_core::qmath::{
    haar_columns, sample_haar_unitary, trace_permuted_product, twirl_exact, Permutation, SeededRng,
};

fn haar_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("haar_unitary");
    for d in [8usize, 16, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            let mut rng = SeededRng::new(BENCH_SEED, 0);
            b.iter(|| black_box(sample_haar_unitary(d, &mut rng).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("haar_two_columns");
    for d in [64usize, 256] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            let mut rng = SeededRng::new(BENCH_SEED, 1);
            b.iter(|| black_box(haar_columns(d, 2, &mut rng).unwrap()))
        });
    }
    group.finish();
}

fn second_order_twirl(c: &mut Criterion) {
    let m = density(16);
    c.bench_function("twirl_exact_k2_d4", |b| b.iter(|| black_box(twirl_exact(black_box(&m), 2).unwrap())));
}

fn permuted_trace(c: &mut Criterion) {
    let mats: Vec<_> = (0..4).map(|_| density(8)).collect();
    let pi = Permutation::from_cycles(4, &[&[1, 3], &[2, 4]]).unwrap();
    c.bench_function("trace_permuted_product_n4_d8", |b| {
        b.iter(|| black_box(trace_permuted_product(black_box(&pi), &mats).unwrap()))
    });
}

criterion_group!(benches, haar_sampling, second_order_twirl, permuted_trace);
criterion_main!(benches);
