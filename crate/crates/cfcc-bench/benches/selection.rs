//! Exact vs sketch-based greedy selection on a mid-size graph.

use cfcc_bench::midsize;
use cfcc::greedy_approx::approx_greedy_with_eval;
use cfcc::greedy_exact::{exact_greedy, EvalPolicy};
use cfcc::laplacian::Preconditioner;
use cfcc::sketch::{DeltaPolicy, SketchConfig};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_selection(c: &mut Criterion) {
    let g = midsize(1);
    let k = 5;

    c.bench_function("exact_greedy_n400_k5", |b| {
        b.iter(|| exact_greedy(black_box(&g), k).unwrap())
    });

    let cfg = SketchConfig {
        delta: DeltaPolicy::practical(),
        preconditioner: Preconditioner::Ic0,
        ..SketchConfig::default()
    };
    c.bench_function("approx_greedy_n400_k5", |b| {
        b.iter(|| approx_greedy_with_eval(black_box(&g), k, &cfg, EvalPolicy::Skip).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_selection
}
criterion_main!(benches);
