//! Reference implementations that ground the rest of the test suite:
//! brute-force enumeration, the quartic naive greedy, sampled checks of
//! monotonicity and supermodularity, the vertex-cover equality criterion,
//! and an eigendecomposition-based pseudoinverse oracle.
//!
//! Everything here favors transparency over speed: fresh dense inversions,
//! no incremental state, no sketching.

use std::time::Instant;

use itertools::Itertools;
use ndarray::Array2;
use rand::Rng;

use crate::centrality::{group_closeness_exact, ClosenessValue};
use crate::graph::Graph;
use crate::greedy_exact::{
    argmax_with_ties, argmin_with_ties, Algorithm, Selection, SelectionConfig, StepEval,
};
use crate::laplacian::{assemble, dense_inverse, ground, DenseInverse, LaplacianMatrix};
use crate::{Error, Result, DEFAULT_ENUM_CAP};

/// `C(n,k)` if it does not exceed `cap`, else `None`. Exact integer
/// arithmetic; the running value stays divisible at every step.
fn binomial_capped(n: usize, k: usize, cap: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c * (n - k + i) as u128 / i as u128;
        if c > cap as u128 {
            return None;
        }
    }
    Some(c as u64)
}

fn trace_of(l: &LaplacianMatrix, s: &[usize]) -> Result<f64> {
    Ok(dense_inverse(&ground(l, s)?, l.n())?.trace())
}

/// Exhaustive maximization of `C(S)` over all `k`-subsets.
///
/// Ties go to the lexicographically smallest set (the first encountered in
/// enumeration order). Refuses when `C(n,k)` exceeds the default cap.
pub fn brute_force_optimum(g: &Graph, k: usize) -> Result<(Vec<usize>, ClosenessValue)> {
    brute_force_optimum_capped(g, k, DEFAULT_ENUM_CAP)
}

/// As [`brute_force_optimum`] with an explicit enumeration cap.
pub fn brute_force_optimum_capped(
    g: &Graph,
    k: usize,
    cap: u64,
) -> Result<(Vec<usize>, ClosenessValue)> {
    let n = g.n();
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if k == 0 || k >= n {
        return Err(Error::Precondition(format!(
            "k must satisfy 1 ≤ k < n (got k={k}, n={n})"
        )));
    }
    if binomial_capped(n, k, cap).is_none() {
        return Err(Error::EnumerationCapExceeded { n, k, cap });
    }

    let l = assemble(g);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in (0..n).combinations(k) {
        let trace = trace_of(&l, &subset)?;
        // Strictly-better replacement keeps the lexicographically first
        // subset among numerical ties.
        let better = match &best {
            None => true,
            Some((_, t)) => trace < *t * (1.0 - 1e-12),
        };
        if better {
            best = Some((subset, trace));
        }
    }

    let (set, trace) = best.expect("at least one subset was evaluated");
    Ok((
        set.clone(),
        ClosenessValue {
            set,
            trace,
            closeness: n as f64 / trace,
        },
    ))
}

/// The `O(kn⁴)` greedy: one fresh dense inversion per candidate per step.
///
/// Exists purely as a cross-check; it must select the same vertex sequence
/// as the maintained-inverse greedy.
pub fn naive_greedy(g: &Graph, k: usize) -> Result<Selection> {
    let n = g.n();
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if k == 0 || k >= n {
        return Err(Error::Precondition(format!(
            "k must satisfy 1 ≤ k < n (got k={k}, n={n})"
        )));
    }
    let l = assemble(g);

    let t0 = Instant::now();
    let traces: Vec<f64> = (0..n)
        .map(|u| trace_of(&l, &[u]))
        .collect::<Result<_>>()?;
    let u1 = argmin_with_ties(&traces);
    let mut chosen = vec![u1];
    let mut current_trace = traces[u1];
    let mut step_scores = vec![traces[u1]];
    let mut step_millis = vec![t0.elapsed().as_secs_f64() * 1e3];
    let mut evals = vec![StepEval {
        trace: current_trace,
        closeness: n as f64 / current_trace,
        estimated: false,
    }];

    for _ in 1..k {
        let t = Instant::now();
        let mut candidates = Vec::new();
        let mut gains = Vec::new();
        let mut with = chosen.clone();
        for u in 0..n {
            if chosen.contains(&u) {
                continue;
            }
            with.push(u);
            let after = trace_of(&l, &with)?;
            with.pop();
            candidates.push((u, after));
            gains.push(current_trace - after);
        }
        let j = argmax_with_ties(&gains);
        chosen.push(candidates[j].0);
        current_trace = candidates[j].1;
        step_scores.push(gains[j]);
        step_millis.push(t.elapsed().as_secs_f64() * 1e3);
        evals.push(StepEval {
            trace: current_trace,
            closeness: n as f64 / current_trace,
            estimated: false,
        });
    }

    Ok(Selection {
        algorithm: Algorithm::Naive,
        chosen,
        step_scores,
        evals,
        step_millis,
        solver: None,
        config: SelectionConfig {
            k,
            dense_cap: n,
            epsilon: None,
            jl_factor: None,
            seed: None,
            delta: None,
        },
    })
}

/// Which assertion a sampled chain violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `tr(L_{-T}^{-1}) > tr(L_{-S}^{-1})` for some `S ⊂ T`.
    Monotonicity,
    /// `gain(S, w) < gain(T, w)` for some `S ⊂ T`, `w ∉ T`.
    Supermodularity,
    /// An entrywise gain-matrix dominance failure at a sampled entry.
    Entrywise,
}

/// A failed chain with everything needed to replay it.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub w: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of [`check_monotone_supermodular`].
#[derive(Debug, Clone, Default)]
pub struct SupermodularReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
}

impl SupermodularReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

const CHAIN_TOL: f64 = 1e-9;

/// Samples random chains `S ⊂ T`, `w ∉ T` and checks that the trace is
/// monotone decreasing, that marginal gains are supermodular, and (at one
/// random matrix entry per trial) that the gain matrices dominate
/// entrywise.
pub fn check_monotone_supermodular(
    g: &Graph,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<SupermodularReport> {
    let n = g.n();
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if !(4..=12).contains(&n) {
        return Err(Error::Precondition(format!(
            "chain sampling needs 4 ≤ n ≤ 12 (got n={n})"
        )));
    }
    let l = assemble(g);
    let mut report = SupermodularReport {
        trials,
        violations: Vec::new(),
    };

    for _ in 0..trials {
        let t_size = rng.random_range(2..=n - 2);
        let s_size = rng.random_range(1..t_size);
        let picks = rand::seq::index::sample(rng, n, t_size + 1).into_vec();
        let mut t_set: Vec<usize> = picks[..t_size].to_vec();
        let w = picks[t_size];
        let mut s_set: Vec<usize> = t_set[..s_size].to_vec();
        s_set.sort_unstable();
        t_set.sort_unstable();

        let mut sw = s_set.clone();
        sw.push(w);
        let mut tw = t_set.clone();
        tw.push(w);

        let inv_s = dense_inverse(&ground(&l, &s_set)?, n)?;
        let inv_t = dense_inverse(&ground(&l, &t_set)?, n)?;
        let inv_sw = dense_inverse(&ground(&l, &sw)?, n)?;
        let inv_tw = dense_inverse(&ground(&l, &tw)?, n)?;

        let (tr_s, tr_t) = (inv_s.trace(), inv_t.trace());
        let (tr_sw, tr_tw) = (inv_sw.trace(), inv_tw.trace());

        if tr_t > tr_s + CHAIN_TOL {
            report.violations.push(Violation {
                kind: ViolationKind::Monotonicity,
                s: s_set.clone(),
                t: t_set.clone(),
                w,
                lhs: tr_t,
                rhs: tr_s,
            });
        }
        let gain_s = tr_s - tr_sw;
        let gain_t = tr_t - tr_tw;
        if gain_s < gain_t - CHAIN_TOL {
            report.violations.push(Violation {
                kind: ViolationKind::Supermodularity,
                s: s_set.clone(),
                t: t_set.clone(),
                w,
                lhs: gain_s,
                rhs: gain_t,
            });
        }

        // Entrywise dominance of the gain matrices at one sampled entry
        // (u, v), both vertices retained even after grounding T + w.
        let retained = inv_tw.rows();
        let u = retained[rng.random_range(0..retained.len())];
        let v = retained[rng.random_range(0..retained.len())];
        let entry = |inv: &DenseInverse| {
            inv.mat()[[inv.index_of(u).unwrap(), inv.index_of(v).unwrap()]]
        };
        let d_s = entry(&inv_s) - entry(&inv_sw);
        let d_t = entry(&inv_t) - entry(&inv_tw);
        if d_s < d_t - CHAIN_TOL || d_t < -CHAIN_TOL {
            report.violations.push(Violation {
                kind: ViolationKind::Entrywise,
                s: s_set,
                t: t_set,
                w,
                lhs: d_s,
                rhs: d_t,
            });
        }
    }
    Ok(report)
}

/// True iff every edge of `g` has at least one endpoint in `s`.
pub fn is_vertex_cover(g: &Graph, s: &[usize]) -> bool {
    let mut in_s = vec![false; g.n()];
    for &u in s {
        if u < g.n() {
            in_s[u] = true;
        }
    }
    g.edges().iter().all(|e| in_s[e.u] || in_s[e.v])
}

/// On a connected 3-regular unit-weight graph, tests whether
/// `C(S) = 3n/(n-|S|)` holds within `1e-9`.
///
/// This equality characterizes vertex covers: grounding a cover makes every
/// retained vertex see exactly its three unit edges as boundary, so
/// `L_{-S}` has the constant diagonal resistance `1/3`.
pub fn vertex_cover_equality_check(g: &Graph, s: &[usize]) -> Result<bool> {
    let n = g.n();
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if (0..n).any(|u| g.degree(u) != 3) {
        return Err(Error::Precondition("graph is not 3-regular".into()));
    }
    if g.edges().iter().any(|e| e.w != 1.0) {
        return Err(Error::Precondition("graph is not unit-weight".into()));
    }
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.len() >= n || sorted.iter().any(|&u| u >= n) {
        return Err(Error::Precondition(format!(
            "need ∅ ≠ S ⊊ V (|S|={}, n={n})",
            sorted.len()
        )));
    }
    let c = group_closeness_exact(g, &sorted, n)?;
    let target = 3.0 * n as f64 / (n - sorted.len()) as f64;
    Ok((c.closeness - target).abs() <= 1e-9)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with `a = V·diag(λ)·Vᵀ`,
/// eigenvalues ascending. Quadratically convergent; intended as an
/// independent oracle for the solver stack, not for performance.
pub fn jacobi_eigh(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Precondition("matrix is not square".into()));
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for i in 0..n {
        for j in 0..n {
            if (a[[i, j]] - a[[j, i]]).abs() > 1e-10 * scale {
                return Err(Error::Precondition("matrix is not symmetric".into()));
            }
        }
    }

    let mut m = a.clone();
    let mut v = Array2::eye(n);
    let mut converged = false;
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += 2.0 * m[[i, j]] * m[[i, j]];
            }
        }
        if off.sqrt() <= 1e-13 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                let app = m[[p, p]];
                let aqq = m[[q, q]];
                m[[p, p]] = app - t * apq;
                m[[q, q]] = aqq + t * apq;
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = m[[i, p]];
                    let aiq = m[[i, q]];
                    m[[i, p]] = c * aip - s * aiq;
                    m[[p, i]] = m[[i, p]];
                    m[[i, q]] = s * aip + c * aiq;
                    m[[q, i]] = m[[i, q]];
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NumericalDegeneracy(
            "Jacobi sweeps did not converge".into(),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[[i, new]] = v[[i, old]];
        }
    }
    Ok((values, vectors))
}

/// Moore-Penrose pseudoinverse via [`jacobi_eigh`]: eigenvalues below
/// `1e-10·λ_max` are treated as zero.
pub fn eigen_pseudoinverse(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let (values, vectors) = jacobi_eigh(a)?;
    let lambda_max = values.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-10 * lambda_max.max(1e-300);
    let mut out = Array2::zeros((n, n));
    for (idx, &lambda) in values.iter().enumerate() {
        if lambda.abs() <= tol {
            continue;
        }
        let inv = 1.0 / lambda;
        for i in 0..n {
            let vi = vectors[[i, idx]];
            if vi == 0.0 {
                continue;
            }
            for j in 0..n {
                out[[i, j]] += inv * vi * vectors[[j, idx]];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::greedy_exact::exact_greedy;
    use crate::laplacian::pseudoinverse;
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binomial_cap_logic() {
        assert_eq!(binomial_capped(4, 2, 100), Some(6));
        assert_eq!(binomial_capped(12, 4, 2_000_000), Some(495));
        assert_eq!(binomial_capped(30, 15, 2_000_000), None);
    }

    #[test]
    fn brute_force_small_examples() {
        let (set, val) = brute_force_optimum(&gen::path(4), 2).unwrap();
        assert_eq!(set, vec![0, 3]);
        assert_abs_diff_eq!(val.closeness, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(val.trace, 4.0 / 3.0, epsilon = 1e-9);

        let (_, val) = brute_force_optimum(&gen::complete(4), 3).unwrap();
        assert_abs_diff_eq!(val.closeness, 12.0, epsilon = 1e-9);

        let (set, val) = brute_force_optimum(&gen::path(3), 1).unwrap();
        assert_eq!(set, vec![1]);
        assert_abs_diff_eq!(val.closeness, 1.5, epsilon = 1e-9);
    }

    #[test]
    fn brute_force_refuses_huge_enumerations() {
        let g = gen::cycle(30);
        assert!(matches!(
            brute_force_optimum(&g, 15),
            Err(Error::EnumerationCapExceeded { .. })
        ));
    }

    #[test]
    fn naive_greedy_examples() {
        let sel = naive_greedy(&gen::path(4), 2).unwrap();
        assert_eq!(sel.chosen, vec![1, 3]);

        // P3: after the center, both leaves gain exactly 1; tie-break
        // takes vertex 0.
        let sel = naive_greedy(&gen::path(3), 2).unwrap();
        assert_eq!(sel.chosen, vec![1, 0]);
    }

    #[test]
    fn naive_greedy_matches_exact_greedy() {
        for seed in 0..12 {
            let g = gen::erdos_renyi_weighted_connected(10, 0.35, 0.5, 2.0, seed);
            let a = naive_greedy(&g, 3).unwrap();
            let b = exact_greedy(&g, 3).unwrap();
            assert_eq!(a.chosen, b.chosen, "divergence at seed {seed}");
        }
    }

    #[test]
    fn supermodularity_holds_on_small_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in [gen::path(4), gen::complete(5)] {
            let report = check_monotone_supermodular(&g, 200, &mut rng).unwrap();
            assert!(report.is_clean(), "violations: {:?}", report.violations);
            assert_eq!(report.trials, 200);
        }
        let g = gen::erdos_renyi_connected(10, 0.4, 3);
        let report = check_monotone_supermodular(&g, 500, &mut rng).unwrap();
        assert!(report.is_clean(), "violations: {:?}", report.violations);
    }

    #[test]
    fn vertex_cover_equality_on_k4_and_k33() {
        let k4 = gen::complete(4);
        for s in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            assert!(vertex_cover_equality_check(&k4, &s).unwrap());
            assert!(is_vertex_cover(&k4, &s));
        }

        let k33 = gen::complete_bipartite(3, 3);
        assert!(vertex_cover_equality_check(&k33, &[0, 1, 2]).unwrap());
        assert!(vertex_cover_equality_check(&k33, &[3, 4, 5]).unwrap());
        // Two vertices of one side leave edges uncovered: strict inequality.
        assert!(!vertex_cover_equality_check(&k33, &[0, 1]).unwrap());
        assert!(!is_vertex_cover(&k33, &[0, 1]));
        let c = group_closeness_exact(&k33, &[0, 1], 10).unwrap();
        assert!(c.closeness < 4.5 - 1e-6);

        assert!(vertex_cover_equality_check(&gen::path(4), &[1]).is_err());
    }

    #[test]
    fn jacobi_diagonalizes_small_laplacians() {
        let l = assemble(&gen::path(2)).dense();
        let (values, vectors) = jacobi_eigh(&l).unwrap();
        assert_abs_diff_eq!(values[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 2.0, epsilon = 1e-12);
        // Reconstruct: V diag(λ) Vᵀ = L.
        for i in 0..2 {
            for j in 0..2 {
                let r: f64 = (0..2)
                    .map(|t| vectors[[i, t]] * values[t] * vectors[[j, t]])
                    .sum();
                assert_abs_diff_eq!(r, l[[i, j]], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn eigen_pseudoinverse_matches_cholesky_route() {
        let g = gen::erdos_renyi_weighted_connected(9, 0.4, 0.5, 2.0, 2);
        let l = assemble(&g);
        let a = eigen_pseudoinverse(&l.dense()).unwrap();
        let b = pseudoinverse(&l, 9).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                assert_abs_diff_eq!(a[[i, j]], b[[i, j]], epsilon = 1e-8);
            }
        }
    }
}
