//! Exact evaluation of group current-flow closeness, effective-resistance
//! sums, and marginal gains.
//!
//! For a connected graph and a nonempty `S ⊊ V`, the diagonal entry
//! `(L_{-S}^{-1})[u,u]` is the effective resistance `ε(u, S)` between `u`
//! and the grounded set, so
//!
//! ```text
//! C(S) = n / Σ_u ε(u, S) = n / tr(L_{-S}^{-1}).
//! ```
//!
//! Removing one more vertex changes the trace by the closed-form marginal
//! gain `(e_uᵀL_{-S}^{-2}e_u) / (e_uᵀL_{-S}^{-1}e_u)`, which
//! [`marginal_gain_exact`] evaluates from a maintained dense inverse.

use ndarray::Array2;
use rand::Rng;

use crate::graph::Graph;
use crate::laplacian::{
    assemble, dense_inverse, ground, hutchinson_trace, DenseInverse, SolveOptions,
};
use crate::{Error, Result};

/// Group closeness value: `closeness · trace = n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosenessValue {
    /// The evaluated set, sorted ascending.
    pub set: Vec<usize>,
    /// `tr(L_{-S}^{-1})`, the sum of effective resistances to `S`.
    pub trace: f64,
    /// `C(S) = n / trace`.
    pub closeness: f64,
}

fn closeness_from_trace(n: usize, set: Vec<usize>, trace: f64) -> Result<ClosenessValue> {
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::NumericalDegeneracy(format!(
            "non-positive trace {trace}"
        )));
    }
    Ok(ClosenessValue {
        set,
        trace,
        closeness: n as f64 / trace,
    })
}

/// Exact `C(S)`: dense inversion when `n - |S|` fits the cap, per-vertex
/// solves (relative accuracy 1e-8) above it.
pub fn group_closeness_exact(g: &Graph, s: &[usize], dense_cap: usize) -> Result<ClosenessValue> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let l = assemble(g);
    let gl = ground(&l, s)?;
    if gl.dim() <= dense_cap {
        let inv = dense_inverse(&gl, dense_cap)?;
        closeness_from_trace(g.n(), gl.grounded_set().to_vec(), inv.trace())
    } else {
        group_closeness_solve(g, s, &SolveOptions::m_norm(1e-8))
    }
}

/// `C(S)` via one linear solve per retained vertex:
/// `tr(L_{-S}^{-1}) = Σ_u e_uᵀ·solve(L_{-S}, e_u)`.
pub fn group_closeness_solve(g: &Graph, s: &[usize], opts: &SolveOptions) -> Result<ClosenessValue> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let l = assemble(g);
    let gl = ground(&l, s)?;
    let d = gl.dim();
    let mut trace = 0.0;
    let mut e = vec![0.0; d];
    for i in 0..d {
        e[i] = 1.0;
        let x = gl.solve(&e, opts)?;
        trace += x[i];
        e[i] = 0.0;
    }
    closeness_from_trace(g.n(), gl.grounded_set().to_vec(), trace)
}

/// `C(S)` with the trace replaced by a Hutchinson estimate.
pub fn group_closeness_hutchinson(
    g: &Graph,
    s: &[usize],
    probes: usize,
    opts: &SolveOptions,
    rng: &mut impl Rng,
) -> Result<ClosenessValue> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let l = assemble(g);
    let gl = ground(&l, s)?;
    let trace = hutchinson_trace(&gl, probes, opts, rng)?;
    closeness_from_trace(g.n(), gl.grounded_set().to_vec(), trace)
}

/// Effective-resistance sums `r[u] = Σ_v ε(u,v) = n·(L†)[u,u] + tr(L†)`.
///
/// Takes the precomputed pseudoinverse so that callers pay the `O(n³)`
/// inversion once.
pub fn er_sum_exact(g: &Graph, ldag: &Array2<f64>) -> Vec<f64> {
    let n = g.n();
    debug_assert_eq!(ldag.nrows(), n);
    let trace: f64 = (0..n).map(|u| ldag[[u, u]]).sum();
    (0..n).map(|u| n as f64 * ldag[[u, u]] + trace).collect()
}

/// Marginal gain of grounding `u` on top of `S`:
/// `tr(L_{-S}^{-1}) - tr(L_{-(S+u)}^{-1}) = ‖L_{-S}^{-1}e_u‖² / (L_{-S}^{-1})[u,u]`.
pub fn marginal_gain_exact(inv: &DenseInverse, u: usize) -> Result<f64> {
    let j = inv
        .index_of(u)
        .ok_or_else(|| Error::Precondition(format!("vertex {u} is already grounded")))?;
    Ok(inv.column_norm_sq(j) / inv.mat()[[j, j]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::laplacian::pseudoinverse;
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn group_closeness_examples() {
        let p3 = gen::path(3);
        let c = group_closeness_exact(&p3, &[1], 100).unwrap();
        assert_abs_diff_eq!(c.trace, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.closeness, 1.5, epsilon = 1e-10);

        let c = group_closeness_exact(&p3, &[0], 100).unwrap();
        assert_abs_diff_eq!(c.trace, 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.closeness, 1.0, epsilon = 1e-10);

        // K4 with a 3-vertex cover: C = 3n/(n-k) = 12.
        let c = group_closeness_exact(&gen::complete(4), &[0, 1, 2], 100).unwrap();
        assert_abs_diff_eq!(c.trace, 1.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.closeness, 12.0, epsilon = 1e-9);
    }

    #[test]
    fn closeness_times_trace_is_n() {
        let g = gen::erdos_renyi_connected(11, 0.35, 2);
        for s in [vec![0], vec![3, 7], vec![1, 4, 9]] {
            let c = group_closeness_exact(&g, &s, 100).unwrap();
            assert_abs_diff_eq!(c.closeness * c.trace, g.n() as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn evaluation_methods_agree() {
        let g = gen::erdos_renyi_weighted_connected(14, 0.3, 0.5, 2.0, 8);
        let dense = group_closeness_exact(&g, &[2, 5], 100).unwrap();
        let solved =
            group_closeness_solve(&g, &[2, 5], &SolveOptions::residual(1e-11)).unwrap();
        assert_abs_diff_eq!(dense.trace, solved.trace, epsilon = 1e-7);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hutch =
            group_closeness_hutchinson(&g, &[2, 5], 4000, &SolveOptions::residual(1e-10), &mut rng)
                .unwrap();
        // Statistical: 4000 probes keep the estimate within a few percent.
        assert!((hutch.trace - dense.trace).abs() / dense.trace < 0.1);
    }

    #[test]
    fn er_sums_on_small_graphs() {
        let p3 = gen::path(3);
        let ldag = pseudoinverse(&assemble(&p3), 100).unwrap();
        let r = er_sum_exact(&p3, &ldag);
        assert_abs_diff_eq!(r.as_slice(), [3.0, 2.0, 3.0].as_slice(), epsilon = 1e-9);

        let k3 = gen::complete(3);
        let ldag = pseudoinverse(&assemble(&k3), 100).unwrap();
        let r = er_sum_exact(&k3, &ldag);
        let want = 4.0 / 3.0;
        assert_abs_diff_eq!(
            r.as_slice(),
            [want, want, want].as_slice(),
            epsilon = 1e-9
        );

        let k2 = gen::path(2);
        let ldag = pseudoinverse(&assemble(&k2), 100).unwrap();
        let r = er_sum_exact(&k2, &ldag);
        assert_abs_diff_eq!(r.as_slice(), [1.0, 1.0].as_slice(), epsilon = 1e-9);
    }

    #[test]
    fn marginal_gain_matches_trace_difference() {
        // P3 grounded at {1}: inverse is the identity, gain of 0 is 1.
        let l = assemble(&gen::path(3));
        let inv = dense_inverse(&ground(&l, &[1]).unwrap(), 100).unwrap();
        assert_abs_diff_eq!(marginal_gain_exact(&inv, 0).unwrap(), 1.0, epsilon = 1e-10);

        // P4 grounded at {1}: grounding 3 drops the trace from 4 to 1.5.
        let l = assemble(&gen::path(4));
        let inv = dense_inverse(&ground(&l, &[1]).unwrap(), 100).unwrap();
        assert_abs_diff_eq!(inv.trace(), 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(marginal_gain_exact(&inv, 3).unwrap(), 2.5, epsilon = 1e-10);

        assert!(marginal_gain_exact(&inv, 1).is_err());
    }
}
