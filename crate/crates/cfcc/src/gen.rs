//! Seeded graph families for tests, benchmarks, and examples.
//!
//! Every random family is deterministic given its seed. Weights are 1.0
//! unless stated otherwise.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

/// Path graph `P_n`: vertices 0..n-1, edges (i, i+1).
pub fn path(n: usize) -> Graph {
    let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect();
    Graph::new(n, edges).expect("path edges are simple")
}

/// Cycle graph `C_n`, n ≥ 3.
pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs n ≥ 3");
    let mut edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    edges.push((n - 1, 0, 1.0));
    Graph::new(n, edges).expect("cycle edges are simple")
}

/// Complete graph `K_n`.
pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, 1.0));
        }
    }
    Graph::new(n, edges).expect("complete edges are simple")
}

/// Complete bipartite graph `K_{a,b}`; left side 0..a, right side a..a+b.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let mut edges = Vec::with_capacity(a * b);
    for i in 0..a {
        for j in 0..b {
            edges.push((i, a + j, 1.0));
        }
    }
    Graph::new(a + b, edges).expect("bipartite edges are simple")
}

/// Star graph: center 0 joined to 1..n-1.
pub fn star(n: usize) -> Graph {
    let edges = (1..n).map(|i| (0, i, 1.0)).collect();
    Graph::new(n, edges).expect("star edges are simple")
}

/// The Petersen graph: outer 5-cycle 0..4, inner pentagram 5..9, spokes.
pub fn petersen() -> Graph {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5 {
        edges.push((i, (i + 1) % 5, 1.0));
        edges.push((5 + i, 5 + (i + 2) % 5, 1.0));
        edges.push((i, 5 + i, 1.0));
    }
    Graph::new(10, edges).expect("petersen edges are simple")
}

/// Circulant graph `C_n(offsets)`: i joined to i ± o (mod n) for each offset.
pub fn circulant(n: usize, offsets: &[usize]) -> Graph {
    let mut set: HashSet<(usize, usize)> = HashSet::new();
    for i in 0..n {
        for &o in offsets {
            assert!(o >= 1 && o <= n / 2, "offset {o} out of range");
            let j = (i + o) % n;
            if i != j {
                set.insert((i.min(j), i.max(j)));
            }
        }
    }
    let edges = set.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
    Graph::new(n, edges).expect("circulant edges are simple")
}

/// Erdős–Rényi `G(n, p)`, resampled until connected (deterministic in seed).
///
/// After 200 failed attempts a uniformly random Hamiltonian path is added to
/// force connectivity; for the `(n, p)` ranges used in tests this is
/// essentially unreachable.
pub fn erdos_renyi_connected(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j, 1.0));
                }
            }
        }
        let g = Graph::new(n, edges).expect("sampled edges are simple");
        if g.is_connected() {
            return g;
        }
    }
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.insert((i, j));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    for w in order.windows(2) {
        edges.insert((w[0].min(w[1]), w[0].max(w[1])));
    }
    let edges = edges.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
    Graph::new(n, edges).expect("forced-connected edges are simple")
}

/// Connected Erdős–Rényi graph with weights uniform in `[w_lo, w_hi]`.
pub fn erdos_renyi_weighted_connected(n: usize, p: f64, w_lo: f64, w_hi: f64, seed: u64) -> Graph {
    assert!(w_lo > 0.0 && w_hi >= w_lo, "weight range must be positive");
    let base = erdos_renyi_connected(n, p, seed);
    // Weights come from a stream independent of the topology sampling.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77ed_c0de);
    let edges = base
        .edges()
        .iter()
        .map(|e| (e.u, e.v, w_lo + (w_hi - w_lo) * rng.random::<f64>()))
        .collect();
    Graph::new(base.n(), edges).expect("reweighted edges are simple")
}

/// Random geometric graph: n points uniform in the unit square, unit-weight
/// edges between pairs at distance ≤ radius. May be disconnected; callers
/// typically reduce to the largest connected component.
pub fn random_geometric(n: usize, radius: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let cells = (1.0 / radius).floor().max(1.0) as i64;
    let cell_of = |x: f64| ((x * cells as f64) as i64).min(cells - 1);
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        grid.entry((cell_of(x), cell_of(y))).or_default().push(i);
    }
    let r2 = radius * radius;
    let mut edges = Vec::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bucket {
                    if j <= i {
                        continue;
                    }
                    let (px, py) = pts[j];
                    let (ex, ey) = (x - px, y - py);
                    if ex * ex + ey * ey <= r2 {
                        edges.push((i, j, 1.0));
                    }
                }
            }
        }
    }
    Graph::new(n, edges).expect("geometric edges are simple")
}

/// Ring of n vertices plus `extra` random chords per vertex (duplicates
/// skipped), a constant-degree expander-like family. Always connected.
pub fn ring_with_chords(n: usize, extra: usize, seed: u64) -> Graph {
    assert!(n >= 3, "ring needs n ≥ 3");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set: HashSet<(usize, usize)> = HashSet::new();
    for i in 0..n {
        let j = (i + 1) % n;
        set.insert((i.min(j), i.max(j)));
    }
    for i in 0..n {
        for _ in 0..extra {
            let j = rng.random_range(0..n);
            if j != i {
                set.insert((i.min(j), i.max(j)));
            }
        }
    }
    let edges = set.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
    Graph::new(n, edges).expect("ring-chord edges are simple")
}
