//! Shared graph builders for the benchmark targets.

use cfcc::gen;
use cfcc::graph::Graph;

/// Mid-size weighted graph where both the dense and the sketched pipelines
/// finish in milliseconds, so comparisons stay cheap to run.
pub fn midsize(seed: u64) -> Graph {
    gen::erdos_renyi_weighted_connected(400, 0.02, 0.5, 2.0, seed)
}

/// Sparse expander-like graph used for the solver-heavy benchmarks.
pub fn sparse_ring(n: usize, seed: u64) -> Graph {
    gen::ring_with_chords(n, 2, seed)
}
