//! Deterministic `O(n³)` greedy selection, plus the ranking baselines it is
//! compared against.
//!
//! The greedy starts from the single vertex minimizing the effective-
//! resistance sum `Σ_v ε(u,v) = n·(L†)[u,u] + tr(L†)` (equivalently,
//! maximizing single-vertex closeness), then repeatedly grounds the vertex
//! with the largest exact marginal gain, maintaining the dense inverse of
//! the grounded Laplacian with `O(n²)` rank-1 updates. Total cost is one
//! `O(n³)` inversion plus `O(kn²)`.

use std::time::Instant;

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::centrality::er_sum_exact;
use crate::graph::Graph;
use crate::laplacian::{
    assemble, dense_inverse, ground, hutchinson_trace, pseudoinverse, SolveOptions,
};
use crate::{Error, Result, DEFAULT_DENSE_CAP};

/// Which selector produced a [`Selection`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Deterministic greedy with maintained dense inverse.
    Exact,
    /// Sketch-based randomized greedy.
    Approx,
    /// Reference greedy with a fresh inversion per candidate.
    Naive,
    /// Uniformly random distinct vertices.
    Random,
    /// Highest weighted degree first.
    TopDegree,
    /// Highest single-vertex closeness first.
    TopCent,
}

impl Algorithm {
    /// Stable lowercase name, as accepted by the command line.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::Approx => "approx",
            Algorithm::Naive => "naive",
            Algorithm::Random => "random",
            Algorithm::TopDegree => "top-degree",
            Algorithm::TopCent => "top-cent",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Objective value after one selection step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEval {
    /// `tr(L_{-S_i}^{-1})` (or an estimate of it).
    pub trace: f64,
    /// `C(S_i) = n / trace`.
    pub closeness: f64,
    /// True when the trace was estimated rather than computed exactly.
    pub estimated: bool,
}

/// Aggregate iterative-solver effort behind a selection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverSummary {
    /// Number of linear systems solved.
    pub solves: usize,
    /// Total conjugate-gradient iterations across all solves.
    pub iterations: u64,
    /// Largest relative residual left by any solve.
    pub max_residual: f64,
}

impl SolverSummary {
    pub(crate) fn absorb(&mut self, iters: usize, residual: f64) {
        self.solves += 1;
        self.iterations += iters as u64;
        if residual > self.max_residual {
            self.max_residual = residual;
        }
    }
}

/// Snapshot of the knobs a selection ran with.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub k: usize,
    pub dense_cap: usize,
    /// Sketch accuracy, when the algorithm sketches.
    pub epsilon: Option<f64>,
    /// Projection rows per `ln n`, when the algorithm sketches.
    pub jl_factor: Option<f64>,
    /// RNG seed, when the algorithm is randomized.
    pub seed: Option<u64>,
    /// Human-readable note on the solver tolerance schedule in effect.
    pub delta: Option<String>,
}

impl SelectionConfig {
    fn deterministic(k: usize, dense_cap: usize) -> Self {
        SelectionConfig {
            k,
            dense_cap,
            epsilon: None,
            jl_factor: None,
            seed: None,
            delta: None,
        }
    }
}

/// Result of a group-selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub algorithm: Algorithm,
    /// Chosen vertices in selection order (`u₁ .. u_k`).
    pub chosen: Vec<usize>,
    /// Per-step objective used for the choice: the minimized
    /// effective-resistance sum at step 1, the maximized gain afterwards;
    /// the ranking score for baselines.
    pub step_scores: Vec<f64>,
    /// Closeness after each step. Empty when evaluation was skipped.
    pub evals: Vec<StepEval>,
    /// Selection time per step, milliseconds. Excludes evaluation.
    pub step_millis: Vec<f64>,
    /// Iterative-solver totals, when an iterative solver was used.
    pub solver: Option<SolverSummary>,
    pub config: SelectionConfig,
}

impl Selection {
    /// Sorted copy of the chosen set.
    pub fn sorted_set(&self) -> Vec<usize> {
        let mut s = self.chosen.clone();
        s.sort_unstable();
        s
    }

    /// Closeness after the last step, if evaluated.
    pub fn final_closeness(&self) -> Option<f64> {
        self.evals.last().map(|e| e.closeness)
    }

    /// Trace after the last step, if evaluated.
    pub fn final_trace(&self) -> Option<f64> {
        self.evals.last().map(|e| e.trace)
    }

    /// Total selection time in milliseconds.
    pub fn total_millis(&self) -> f64 {
        self.step_millis.iter().sum()
    }
}

/// Relative half-width of the tie band: scores this close to the best are
/// treated as tied and resolved by smallest vertex id. Keeps selections
/// stable when symmetric vertices produce gains equal up to rounding.
pub(crate) const TIE_REL_TOL: f64 = 1e-9;

/// Position of the smallest-index entry within `TIE_REL_TOL` of the maximum.
pub(crate) fn argmax_with_ties(values: &[f64]) -> usize {
    debug_assert!(!values.is_empty());
    let mut best = f64::NEG_INFINITY;
    for &v in values {
        if v > best {
            best = v;
        }
    }
    let band = TIE_REL_TOL * best.abs();
    values
        .iter()
        .position(|&v| v >= best - band)
        .expect("nonempty slice has a maximum")
}

/// Position of the smallest-index entry within `TIE_REL_TOL` of the minimum.
pub(crate) fn argmin_with_ties(values: &[f64]) -> usize {
    debug_assert!(!values.is_empty());
    let mut best = f64::INFINITY;
    for &v in values {
        if v < best {
            best = v;
        }
    }
    let band = TIE_REL_TOL * best.abs();
    values
        .iter()
        .position(|&v| v <= best + band)
        .expect("nonempty slice has a minimum")
}

fn validate_k(g: &Graph, k: usize) -> Result<()> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if k == 0 || k >= g.n() {
        return Err(Error::Precondition(format!(
            "k must satisfy 1 ≤ k < n (got k={k}, n={})",
            g.n()
        )));
    }
    Ok(())
}

/// Greedy selection with the default dense cap.
pub fn exact_greedy(g: &Graph, k: usize) -> Result<Selection> {
    exact_greedy_with_cap(g, k, DEFAULT_DENSE_CAP)
}

/// Greedy selection of `k` vertices maximizing group closeness.
///
/// Step 1 picks `u₁ = argmin_u n·(L†)[u,u] + tr(L†)`; every later step picks
/// `argmax_u ‖L_{-S}^{-1}e_u‖² / (L_{-S}^{-1})[u,u]` and grounds the winner
/// with a rank-1 inverse update. Ties go to the smallest vertex id.
pub fn exact_greedy_with_cap(g: &Graph, k: usize, dense_cap: usize) -> Result<Selection> {
    validate_k(g, k)?;
    let n = g.n();
    let l = assemble(g);

    let t0 = Instant::now();
    let ldag = pseudoinverse(&l, dense_cap)?;
    let er_sums = er_sum_exact(g, &ldag);
    drop(ldag);
    let u1 = argmin_with_ties(&er_sums);

    let mut chosen = vec![u1];
    let mut step_scores = vec![er_sums[u1]];
    let mut inv = dense_inverse(&ground(&l, &[u1])?, dense_cap)?;
    let mut step_millis = vec![t0.elapsed().as_secs_f64() * 1e3];
    let mut evals = vec![StepEval {
        trace: inv.trace(),
        closeness: n as f64 / inv.trace(),
        estimated: false,
    }];

    let mut gains = Vec::new();
    for _ in 1..k {
        let t = Instant::now();
        let d = inv.dim();
        gains.clear();
        gains.reserve(d);
        for j in 0..d {
            gains.push(inv.column_norm_sq(j) / inv.mat()[[j, j]]);
        }
        let j = argmax_with_ties(&gains);
        let u = inv.rows()[j];
        inv = inv.rank1_ground_update(u)?;
        chosen.push(u);
        step_scores.push(gains[j]);
        step_millis.push(t.elapsed().as_secs_f64() * 1e3);
        evals.push(StepEval {
            trace: inv.trace(),
            closeness: n as f64 / inv.trace(),
            estimated: false,
        });
    }

    Ok(Selection {
        algorithm: Algorithm::Exact,
        chosen,
        step_scores,
        evals,
        step_millis,
        solver: None,
        config: SelectionConfig::deterministic(k, dense_cap),
    })
}

/// How (and whether) to evaluate closeness after each step of a selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPolicy {
    /// Dense evaluation below the cap, Hutchinson with 100 probes above.
    Auto,
    /// Exact, via a maintained dense inverse.
    Dense,
    /// Hutchinson trace estimation with the given probe count.
    Hutchinson(usize),
    /// No evaluation; `evals` stays empty.
    Skip,
}

/// Dense-evaluation threshold for [`EvalPolicy::Auto`].
const AUTO_DENSE_LIMIT: usize = 2000;

/// Exact or estimated closeness after each prefix of `chosen`.
///
/// Dense mode grounds the first vertex once and applies rank-1 updates, so
/// the whole trajectory costs one inversion. Hutchinson mode draws its
/// probes from a seed-derived stream per step, independent of any stream
/// the selector used.
pub fn evaluate_prefixes(
    g: &Graph,
    chosen: &[usize],
    policy: EvalPolicy,
    seed: u64,
) -> Result<Vec<StepEval>> {
    let policy = match policy {
        EvalPolicy::Auto if g.n() <= AUTO_DENSE_LIMIT => EvalPolicy::Dense,
        EvalPolicy::Auto => EvalPolicy::Hutchinson(100),
        p => p,
    };
    let n = g.n();
    let l = assemble(g);
    let mut evals = Vec::with_capacity(chosen.len());
    match policy {
        EvalPolicy::Skip => {}
        EvalPolicy::Dense => {
            let mut inv = dense_inverse(&ground(&l, &chosen[..1])?, n)?;
            evals.push(StepEval {
                trace: inv.trace(),
                closeness: n as f64 / inv.trace(),
                estimated: false,
            });
            for &u in &chosen[1..] {
                inv = inv.rank1_ground_update(u)?;
                evals.push(StepEval {
                    trace: inv.trace(),
                    closeness: n as f64 / inv.trace(),
                    estimated: false,
                });
            }
        }
        EvalPolicy::Hutchinson(probes) => {
            let opts = SolveOptions::residual(1e-8);
            for i in 0..chosen.len() {
                let gl = ground(&l, &chosen[..=i])?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(0x0080_0000 + i as u64);
                let trace = hutchinson_trace(&gl, probes, &opts, &mut rng)?;
                evals.push(StepEval {
                    trace,
                    closeness: n as f64 / trace,
                    estimated: true,
                });
            }
        }
        EvalPolicy::Auto => unreachable!("resolved above"),
    }
    Ok(evals)
}

fn ranking_selection(
    g: &Graph,
    k: usize,
    algorithm: Algorithm,
    order: Vec<(usize, f64)>,
    seed: Option<u64>,
    dense_cap: usize,
) -> Result<Selection> {
    let t0 = Instant::now();
    let chosen: Vec<usize> = order.iter().take(k).map(|&(u, _)| u).collect();
    let step_scores: Vec<f64> = order.iter().take(k).map(|&(_, s)| s).collect();
    let millis = t0.elapsed().as_secs_f64() * 1e3;
    let mut step_millis = vec![0.0; k];
    step_millis[0] = millis;
    let evals = evaluate_prefixes(g, &chosen, EvalPolicy::Auto, seed.unwrap_or(0))?;
    Ok(Selection {
        algorithm,
        chosen,
        step_scores,
        evals,
        step_millis,
        solver: None,
        config: SelectionConfig {
            seed,
            ..SelectionConfig::deterministic(k, dense_cap)
        },
    })
}

/// Baseline: `k` distinct vertices drawn uniformly with the given seed.
pub fn random_selection(g: &Graph, k: usize, seed: u64) -> Result<Selection> {
    validate_k(g, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, g.n(), k);
    let order: Vec<(usize, f64)> = picks.into_iter().map(|u| (u, 0.0)).collect();
    ranking_selection(g, k, Algorithm::Random, order, Some(seed), DEFAULT_DENSE_CAP)
}

/// Baseline: the `k` vertices of highest weighted degree, ties by smallest id.
pub fn top_degree_selection(g: &Graph, k: usize) -> Result<Selection> {
    validate_k(g, k)?;
    let mut order: Vec<(usize, f64)> = (0..g.n()).map(|u| (u, g.weighted_degree(u))).collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranking_selection(g, k, Algorithm::TopDegree, order, None, DEFAULT_DENSE_CAP)
}

/// Baseline: the `k` vertices of highest single-vertex closeness
/// `C(u) = n / Σ_v ε(u,v)`, ties by smallest id.
pub fn top_cent_selection(g: &Graph, k: usize, dense_cap: usize) -> Result<Selection> {
    validate_k(g, k)?;
    let l = assemble(g);
    let ldag = pseudoinverse(&l, dense_cap)?;
    let er_sums = er_sum_exact(g, &ldag);
    drop(ldag);
    let n = g.n();
    let mut order: Vec<(usize, f64)> = er_sums
        .into_iter()
        .enumerate()
        .map(|(u, r)| (u, n as f64 / r))
        .collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranking_selection(g, k, Algorithm::TopCent, order, None, dense_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tie_helpers_prefer_smallest_index() {
        assert_eq!(argmin_with_ties(&[3.0, 2.0, 2.0 + 1e-12, 3.0]), 1);
        assert_eq!(argmax_with_ties(&[1.0, 5.0 - 1e-12, 5.0, 0.5]), 1);
        assert_eq!(argmax_with_ties(&[1.0, 4.0, 5.0, 0.5]), 2);
        assert_eq!(argmin_with_ties(&[0.0]), 0);
    }

    #[test]
    fn path3_k1_picks_center() {
        let sel = exact_greedy(&gen::path(3), 1).unwrap();
        assert_eq!(sel.chosen, vec![1]);
        assert_abs_diff_eq!(sel.step_scores[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sel.final_closeness().unwrap(), 1.5, epsilon = 1e-9);
    }

    #[test]
    fn path4_k2_breaks_tie_then_takes_far_end() {
        // ER sums are (6,4,4,6): vertices 1 and 2 tie, smallest id wins.
        // From S={1} the gains are 1 (vertex 0), 2 (vertex 2), 2.5 (vertex 3).
        let sel = exact_greedy(&gen::path(4), 2).unwrap();
        assert_eq!(sel.chosen, vec![1, 3]);
        assert_abs_diff_eq!(sel.step_scores[1], 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(sel.final_closeness().unwrap(), 4.0 / 1.5, epsilon = 1e-9);
    }

    #[test]
    fn k33_k3_selects_one_side() {
        // Bipartite sides {0,1,2} and {3,4,5}; either side is a vertex
        // cover, and the tie-break lands on the smaller-id side.
        let sel = exact_greedy(&gen::complete_bipartite(3, 3), 3).unwrap();
        assert_eq!(sel.sorted_set(), vec![0, 1, 2]);
        assert_abs_diff_eq!(sel.final_closeness().unwrap(), 6.0, epsilon = 1e-9);
    }

    #[test]
    fn traces_strictly_decrease_and_closeness_increases() {
        let g = gen::erdos_renyi_weighted_connected(12, 0.35, 0.5, 2.0, 3);
        let sel = exact_greedy(&g, 5).unwrap();
        for w in sel.evals.windows(2) {
            assert!(w[1].trace < w[0].trace);
            assert!(w[1].closeness > w[0].closeness);
        }
        assert_eq!(sel.chosen.len(), 5);
        assert_eq!(sel.step_millis.len(), 5);
        assert_eq!(sel.step_scores.len(), 5);
    }

    #[test]
    fn rejects_bad_k() {
        let g = gen::path(4);
        assert!(matches!(
            exact_greedy(&g, 0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            exact_greedy(&g, 4),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn evaluate_prefixes_matches_inline_evals() {
        let g = gen::erdos_renyi_connected(10, 0.4, 5);
        let sel = exact_greedy(&g, 3).unwrap();
        let replay = evaluate_prefixes(&g, &sel.chosen, EvalPolicy::Dense, 0).unwrap();
        for (a, b) in sel.evals.iter().zip(&replay) {
            assert_abs_diff_eq!(a.trace, b.trace, epsilon = 1e-9);
        }
        assert!(evaluate_prefixes(&g, &sel.chosen, EvalPolicy::Skip, 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn random_selection_is_reproducible() {
        let g = gen::erdos_renyi_connected(12, 0.3, 7);
        let a = random_selection(&g, 3, 7).unwrap();
        let b = random_selection(&g, 3, 7).unwrap();
        assert_eq!(a.chosen, b.chosen);
        assert_eq!(a.chosen.len(), 3);
        let c = random_selection(&g, 3, 8).unwrap();
        // Different seeds very likely give a different draw on 12 vertices.
        assert!(a.chosen != c.chosen || a.config.seed != c.config.seed);
    }

    #[test]
    fn top_degree_ranks_star_center_first() {
        let sel = top_degree_selection(&gen::star(6), 1).unwrap();
        assert_eq!(sel.chosen, vec![0]);
        assert_abs_diff_eq!(sel.step_scores[0], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn top_cent_ranks_path_center_first() {
        let sel = top_cent_selection(&gen::path(3), 1, 100).unwrap();
        assert_eq!(sel.chosen, vec![1]);
        assert_abs_diff_eq!(sel.step_scores[0], 1.5, epsilon = 1e-9);
    }
}
