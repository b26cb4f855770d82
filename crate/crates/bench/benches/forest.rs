//! Micro-benchmarks for tree descent, forest training, and label combination.

use std::cell::Cell;
use std::hint::black_box;

use bf_bench::{hypercube_points, trained_forest};
use boundary_forest::{shepard_estimate, LabelVector};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

const DIM: usize = 20;

/// Queries a single tree (forest of one) at both cap settings. The capped
/// tree descends a deeper path; the uncapped one scans a wide root.
fn bench_tree_query(c: &mut Criterion) {
    let train = hypercube_points(DIM, 10_000, 7);
    let queries = hypercube_points(DIM, 256, 8);
    let mut group = c.benchmark_group("tree_query_n10k");
    for cap in ["50", "inf"] {
        let forest = trained_forest(&train, 1, cap, 7);
        let next = Cell::new(0usize);
        group.bench_function(format!("k_{cap}"), |b| {
            b.iter(|| {
                let i = next.get();
                next.set((i + 1) % queries.len());
                let y = &queries[i].position;
                black_box(forest.query_with_nonce(y, i as u64).unwrap())
            })
        });
    }
    group.finish();
}

/// One online training step into a 50-tree forest that already holds 5k
/// examples. The forest is cloned per iteration so each step sees the same
/// starting state.
fn bench_forest_train_step(c: &mut Criterion) {
    let train = hypercube_points(DIM, 5_000, 9);
    let extra = hypercube_points(DIM, 512, 10);
    let forest = trained_forest(&train, 50, "50", 9);
    let next = Cell::new(0usize);
    let mut group = c.benchmark_group("forest_train_step");
    group.sample_size(20);
    group.bench_function("nt50_k50_n5k", |b| {
        b.iter_batched(
            || forest.clone(),
            |mut forest| {
                let i = next.get();
                next.set((i + 1) % extra.len());
                black_box(forest.train(extra[i].clone()).unwrap())
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

/// Inverse-distance combination of 50 per-tree answers.
fn bench_shepard(c: &mut Criterion) {
    let results: Vec<(LabelVector, f64)> = (0..50)
        .map(|i| {
            let label = LabelVector::indicator(i % 3, 3).unwrap();
            (label, 0.25 + i as f64 * 0.01)
        })
        .collect();
    c.bench_function("shepard_estimate_50", |b| {
        b.iter(|| black_box(shepard_estimate(black_box(&results)).unwrap()))
    });
}

criterion_group!(benches, bench_tree_query, bench_forest_train_step, bench_shepard);
criterion_main!(benches);
