//! Johnson-Lindenstrauss sketching of effective-resistance sums and
//! marginal gains.
//!
//! Both estimators compress a tall implicit matrix `M·L^{-1}` (or
//! `M·L_{-S}^{-1}`) down to `O(log n)` rows: a random Gaussian projection
//! preserves the column norms the estimates are built from within `1 ± ε`,
//! and each projected row costs one Laplacian solve. The projected rows are
//! never materialized against the full matrix; only the right-hand sides
//! `(sketch · M)ᵀ` are formed, in `O(m)` per row.
//!
//! Two degenerate modes exist for testing: the identity projection
//! (no compression) and exact solves (dense pseudoinverse instead of
//! conjugate gradients). With both enabled the estimators reproduce the
//! exact quantities up to rounding, which anchors the property suite.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::graph::Graph;
use crate::greedy_exact::SolverSummary;
use crate::laplacian::{
    assemble, dense_inverse, ground, pseudoinverse, sddm_split, LaplacianMatrix, Preconditioner,
    SolveOptions,
};
use crate::{Error, Result, DEFAULT_JL_FACTOR, DEFAULT_SEED};

/// Lower clamp for the theoretical solver-accuracy schedules, which shrink
/// like `n^{-2}` to `n^{-4}` and fall below attainable f64 accuracy already
/// for moderate `n`.
pub const DELTA_FLOOR: f64 = 1e-12;

// Stream tags partitioning the ChaCha stream space: stream id is
// `tag << 40 | column`, so independent sketches never share a stream.
const STREAM_COL_BITS: u32 = 40;
const TAG_ER: u64 = 0x01;
const TAG_PROJ: u64 = 0x02;
const TAG_GAINS: u64 = 0x10;

fn substream(seed: u64, tag: u64, col: usize) -> ChaCha8Rng {
    debug_assert!((col as u64) < (1 << STREAM_COL_BITS));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << STREAM_COL_BITS) | col as u64);
    rng
}

/// Fills `buf` with a standard Gaussian vector scaled to unit norm.
fn unit_gaussian_column(rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    loop {
        let mut norm_sq = 0.0;
        for x in buf.iter_mut() {
            let v: f64 = rng.sample(StandardNormal);
            *x = v;
            norm_sq += v * v;
        }
        if norm_sq > 0.0 {
            let inv = norm_sq.sqrt().recip();
            for x in buf.iter_mut() {
                *x *= inv;
            }
            return;
        }
        // A zero draw has probability zero; resample for completeness.
    }
}

/// A `q × d` random projection with N(0,1) entries and unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct JlSketch {
    /// Number of projection rows.
    pub q: usize,
    /// The projection matrix, `q × d`.
    pub mat: Array2<f64>,
    /// Seed the matrix was drawn from.
    pub seed: u64,
}

impl JlSketch {
    /// Projects a `d`-vector down to `q` dimensions.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.mat.ncols());
        (0..self.q)
            .map(|i| {
                let row = self.mat.row(i);
                v.iter().zip(row).map(|(&a, &b)| a * b).sum()
            })
            .collect()
    }
}

/// Draws a `q × d` Gaussian projection, each column normalized to length 1.
pub fn gaussian_projection(q: usize, d: usize, seed: u64) -> Result<JlSketch> {
    if q == 0 || d == 0 {
        return Err(Error::Precondition(format!(
            "projection dimensions must be positive (got {q} × {d})"
        )));
    }
    let mut mat = Array2::zeros((q, d));
    let mut col = vec![0.0; q];
    for c in 0..d {
        let mut rng = substream(seed, TAG_PROJ, c);
        unit_gaussian_column(&mut rng, &mut col);
        for i in 0..q {
            mat[[i, c]] = col[i];
        }
    }
    Ok(JlSketch { q, mat, seed })
}

/// Projection rows used by the estimators: `ceil(jl_factor · ln n)`.
pub fn jl_rows(jl_factor: f64, n: usize) -> usize {
    ((jl_factor * (n as f64).ln()).ceil() as usize).max(1)
}

/// Projection rows at which the distance-preservation guarantee holds with
/// high probability: `ceil(4 · (ε²/2 - ε³/3)^{-1} · ln n)`.
pub fn jl_rows_theoretical(epsilon: f64, n: usize) -> usize {
    let denom = epsilon * epsilon / 2.0 - epsilon * epsilon * epsilon / 3.0;
    ((4.0 / denom * (n as f64).ln()).ceil() as usize).max(1)
}

/// What the sketch multiplies by: a Gaussian projection or (for testing)
/// the identity, which disables compression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    #[default]
    Gaussian,
    Identity,
}

/// How solver accuracy is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaPolicy {
    /// The accuracy schedules from the analysis (`δ ∝ n^{-2}` for
    /// resistance sums, `∝ n^{-4}` for gains), interpreted in the matrix
    /// norm and clamped below at [`DELTA_FLOOR`]. The reproducibility mode.
    Theoretical,
    /// A fixed relative-residual target. The schedules are vastly tighter
    /// than the estimates need in practice; this is the fast mode.
    Practical { delta: f64 },
}

impl DeltaPolicy {
    /// The practical mode at its default target of `1e-8`.
    pub fn practical() -> Self {
        DeltaPolicy::Practical { delta: 1e-8 }
    }
}

/// Configuration for the sketch-based estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchConfig {
    /// Accuracy parameter, in `(0, 1/2]`.
    pub epsilon: f64,
    /// Projection rows per `ln n`.
    pub jl_factor: f64,
    /// Master RNG seed; all sketch randomness derives from it.
    pub seed: u64,
    /// Solver accuracy policy.
    pub delta: DeltaPolicy,
    /// Preconditioner for the inner conjugate-gradient solves.
    pub preconditioner: Preconditioner,
    pub projection: Projection,
    /// Replace iterative solves by dense exact ones (testing).
    pub exact_solve: bool,
}

impl Default for SketchConfig {
    fn default() -> Self {
        SketchConfig {
            epsilon: 0.3,
            jl_factor: DEFAULT_JL_FACTOR,
            seed: DEFAULT_SEED,
            delta: DeltaPolicy::Theoretical,
            preconditioner: Preconditioner::Jacobi,
            projection: Projection::Gaussian,
            exact_solve: false,
        }
    }
}

impl SketchConfig {
    /// The fully deterministic mode: identity projection and exact solves.
    /// Estimates degenerate to the exact quantities.
    pub fn degenerate() -> Self {
        SketchConfig {
            projection: Projection::Identity,
            exact_solve: true,
            ..SketchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::Precondition(format!(
                "epsilon must lie in (0, 1/2] (got {})",
                self.epsilon
            )));
        }
        if !(self.jl_factor > 0.0 && self.jl_factor.is_finite()) {
            return Err(Error::Precondition(format!(
                "jl_factor must be positive (got {})",
                self.jl_factor
            )));
        }
        if let DeltaPolicy::Practical { delta } = self.delta {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::Precondition(format!(
                    "practical delta must be positive (got {delta})"
                )));
            }
        }
        Ok(())
    }

    /// Copy with a different accuracy parameter (the greedy driver runs the
    /// two estimators at `ε/3` and `ε/2`).
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        SketchConfig {
            epsilon,
            ..self.clone()
        }
    }

    /// Projection rows for a graph on `n` vertices.
    pub fn rows(&self, n: usize) -> usize {
        jl_rows(self.jl_factor, n)
    }

    fn solve_options(&self, schedule: f64) -> SolveOptions {
        let base = match self.delta {
            DeltaPolicy::Theoretical => SolveOptions::m_norm(schedule.max(DELTA_FLOOR)),
            DeltaPolicy::Practical { delta } => SolveOptions::residual(delta),
        };
        base.with_preconditioner(self.preconditioner)
    }
}

/// Solver accuracy for the resistance-sum sketch:
/// `δ = (ε/9n²)·√((1-ε/3)·w_min / ((1+ε/3)·w_max))`.
pub fn er_delta(epsilon: f64, n: usize, w_min: f64, w_max: f64) -> f64 {
    let n = n as f64;
    (epsilon / (9.0 * n * n))
        * ((1.0 - epsilon / 3.0) * w_min / ((1.0 + epsilon / 3.0) * w_max)).sqrt()
}

/// Solver accuracy for the gain numerator:
/// `δ₁ = (w_min·ε / 27·w_max·n⁴)·√((1-ε/9) / ((1+ε/9)·n))`.
pub fn gains_delta_num(epsilon: f64, n: usize, w_min: f64, w_max: f64) -> f64 {
    let n = n as f64;
    (w_min * epsilon / (27.0 * w_max * n.powi(4)))
        * ((1.0 - epsilon / 9.0) / ((1.0 + epsilon / 9.0) * n)).sqrt()
}

/// Solver accuracy for the gain denominator:
/// `δ₂ = δ₃ = (1 / 4n⁴·w_max)·√(ε·w_min^{3/2} / 9n)`.
pub fn gains_delta_den(epsilon: f64, n: usize, w_min: f64, w_max: f64) -> f64 {
    let n = n as f64;
    (1.0 / (4.0 * n.powi(4) * w_max)) * (epsilon * w_min.powf(1.5) / (9.0 * n)).sqrt()
}

/// Solves one linear system per row of `rhs`, adding the squared entries of
/// each solution into `acc`. Returns the total added (the Frobenius mass).
fn accumulate_squares(
    rhs: &Array2<f64>,
    mut solve: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    acc: &mut [f64],
) -> Result<f64> {
    let mut frob = 0.0;
    for i in 0..rhs.nrows() {
        let row = rhs.row(i);
        let b = row.as_slice().expect("rhs rows are contiguous");
        let z = solve(b)?;
        for (a, &zv) in acc.iter_mut().zip(&z) {
            *a += zv * zv;
            frob += zv * zv;
        }
    }
    Ok(frob)
}

/// Estimates `r_u = Σ_v ε(u,v)` for every vertex in `Õ(m)` time.
///
/// Sketches `Z = QW^{1/2}BL†` one row per solve and returns
/// `r_u = n·‖Z̃e_u‖² + ‖Z̃‖_F²`, each within `1 ± ε` of the truth with
/// high probability.
pub fn er_sums_est(g: &Graph, cfg: &SketchConfig) -> Result<Vec<f64>> {
    let mut summary = SolverSummary::default();
    er_sums_est_in(&assemble(g), cfg, &mut summary)
}

pub(crate) fn er_sums_est_in(
    l: &LaplacianMatrix,
    cfg: &SketchConfig,
    summary: &mut SolverSummary,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !l.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = l.n();
    let m = l.edges().len();
    let q = match cfg.projection {
        Projection::Gaussian => cfg.rows(n),
        Projection::Identity => m,
    };

    let mut rhs = Array2::zeros((q, n));
    match cfg.projection {
        Projection::Identity => {
            for (c, e) in l.edges().iter().enumerate() {
                let s = e.w.sqrt();
                rhs[[c, e.u]] += s;
                rhs[[c, e.v]] -= s;
            }
        }
        Projection::Gaussian => {
            let mut col = vec![0.0; q];
            for (c, e) in l.edges().iter().enumerate() {
                let mut rng = substream(cfg.seed, TAG_ER, c);
                unit_gaussian_column(&mut rng, &mut col);
                let s = e.w.sqrt();
                for i in 0..q {
                    let v = s * col[i];
                    rhs[[i, e.u]] += v;
                    rhs[[i, e.v]] -= v;
                }
            }
        }
    }

    let mut col_sq = vec![0.0; n];
    let frob = if cfg.exact_solve {
        let ldag = pseudoinverse(l, n)?;
        accumulate_squares(
            &rhs,
            |b| {
                Ok((0..n)
                    .map(|u| (0..n).map(|j| ldag[[u, j]] * b[j]).sum())
                    .collect())
            },
            &mut col_sq,
        )?
    } else {
        let opts = cfg.solve_options(er_delta(cfg.epsilon, n, l.w_min(), l.w_max()));
        accumulate_squares(
            &rhs,
            |b| {
                let out = l.solve_detailed(b, &opts)?;
                summary.absorb(out.iters, out.residual);
                Ok(out.x)
            },
            &mut col_sq,
        )?
    };

    Ok(col_sq
        .into_iter()
        .map(|c| n as f64 * c + frob)
        .collect())
}

/// Estimates the marginal gain of grounding each `u ∉ S` in `Õ(m)` time.
///
/// Returns `(u, g_u)` pairs in ascending vertex order, each `g_u` within
/// `1 ± ε` of `tr(L_{-S}^{-1}) - tr(L_{-(S+u)}^{-1})` with high probability.
///
/// The numerator sketches `Z⁽¹⁾ = P·L_{-S}^{-1}`; the denominator combines
/// `Z⁽²⁾ = QW'^{1/2}B'·L_{-S}^{-1}` over the induced subgraph with
/// `Z⁽³⁾ = RX^{1/2}·L_{-S}^{-1}` over the boundary diagonal
/// `X = Diag(L_{-S}·1)`; rows where `X` vanishes are skipped.
pub fn gains_est(g: &Graph, s: &[usize], cfg: &SketchConfig) -> Result<Vec<(usize, f64)>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut summary = SolverSummary::default();
    gains_est_step(&assemble(g), s, cfg, 0, &mut summary)
}

pub(crate) fn gains_est_step(
    l: &LaplacianMatrix,
    s: &[usize],
    cfg: &SketchConfig,
    step: usize,
    summary: &mut SolverSummary,
) -> Result<Vec<(usize, f64)>> {
    cfg.validate()?;
    let gl = ground(l, s)?;
    let d = gl.dim();
    let n = gl.n_full();
    let split = sddm_split(&gl);
    let mp = split.incidence.m();
    let tag = TAG_GAINS + 3 * step as u64;

    let rows = match cfg.projection {
        Projection::Gaussian => cfg.rows(n),
        Projection::Identity => 0, // per-sketch natural dimension, below
    };
    let exact_inv = if cfg.exact_solve {
        Some(dense_inverse(&gl, d)?)
    } else {
        None
    };
    let opts_num = cfg.solve_options(gains_delta_num(cfg.epsilon, n, gl.w_min(), gl.w_max()));
    let opts_den = cfg.solve_options(gains_delta_den(cfg.epsilon, n, gl.w_min(), gl.w_max()));

    let mut solve_into = |rhs: &Array2<f64>, opts: &SolveOptions, acc: &mut [f64]| {
        if let Some(inv) = &exact_inv {
            accumulate_squares(rhs, |b| Ok(inv.apply(b)), acc)
        } else {
            accumulate_squares(
                rhs,
                |b| {
                    let out = gl.solve_detailed(b, opts)?;
                    summary.absorb(out.iters, out.residual);
                    Ok(out.x)
                },
                acc,
            )
        }
    };

    // Numerator: sketch P over the retained coordinates.
    let mut num_sq = vec![0.0; d];
    {
        let p = if cfg.projection == Projection::Identity { d } else { rows };
        let mut rhs = Array2::zeros((p, d));
        match cfg.projection {
            Projection::Identity => {
                for c in 0..d {
                    rhs[[c, c]] = 1.0;
                }
            }
            Projection::Gaussian => {
                let mut col = vec![0.0; p];
                for c in 0..d {
                    let mut rng = substream(cfg.seed, tag, c);
                    unit_gaussian_column(&mut rng, &mut col);
                    for i in 0..p {
                        rhs[[i, c]] = col[i];
                    }
                }
            }
        }
        solve_into(&rhs, &opts_num, &mut num_sq)?;
    }

    // Denominator part 1: sketch Q over the induced edges.
    let mut den_sq = vec![0.0; d];
    {
        let q = if cfg.projection == Projection::Identity { mp } else { rows };
        let mut rhs = Array2::zeros((q, d));
        match cfg.projection {
            Projection::Identity => {
                for (c, e) in split.incidence.edges().iter().enumerate() {
                    let s = e.w.sqrt();
                    rhs[[c, e.u]] += s;
                    rhs[[c, e.v]] -= s;
                }
            }
            Projection::Gaussian => {
                let mut col = vec![0.0; q];
                for (c, e) in split.incidence.edges().iter().enumerate() {
                    let mut rng = substream(cfg.seed, tag + 1, c);
                    unit_gaussian_column(&mut rng, &mut col);
                    let s = e.w.sqrt();
                    for i in 0..q {
                        let v = s * col[i];
                        rhs[[i, e.u]] += v;
                        rhs[[i, e.v]] -= v;
                    }
                }
            }
        }
        if q > 0 {
            solve_into(&rhs, &opts_den, &mut den_sq)?;
        }
    }

    // Denominator part 2: sketch R over the boundary diagonal, skipping
    // zero entries of X.
    {
        let nz: Vec<usize> = (0..d).filter(|&c| split.x[c] > 0.0).collect();
        let r = if cfg.projection == Projection::Identity { nz.len() } else { rows };
        let mut rhs = Array2::zeros((r, d));
        match cfg.projection {
            Projection::Identity => {
                for (i, &c) in nz.iter().enumerate() {
                    rhs[[i, c]] = split.x[c].sqrt();
                }
            }
            Projection::Gaussian => {
                let mut col = vec![0.0; r];
                for &c in &nz {
                    let mut rng = substream(cfg.seed, tag + 2, c);
                    unit_gaussian_column(&mut rng, &mut col);
                    let s = split.x[c].sqrt();
                    for i in 0..r {
                        rhs[[i, c]] += s * col[i];
                    }
                }
            }
        }
        if r > 0 {
            solve_into(&rhs, &opts_den, &mut den_sq)?;
        }
    }

    let mut gains = Vec::with_capacity(d);
    for c in 0..d {
        if den_sq[c].is_nan() || den_sq[c] <= 0.0 {
            return Err(Error::NumericalDegeneracy(format!(
                "gain denominator {} ≤ 0 at vertex {}",
                den_sq[c],
                gl.rows()[c]
            )));
        }
        gains.push((gl.rows()[c], num_sq[c] / den_sq[c]));
    }
    Ok(gains)
}
