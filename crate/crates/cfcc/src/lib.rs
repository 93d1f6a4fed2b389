//! Current-flow closeness centrality (CFCC) for vertex groups in weighted
//! undirected graphs.
//!
//! When every edge of a connected graph is read as a resistor of conductance
//! `w(e)`, the effective resistance `ε(u, v)` is a distance between vertices,
//! and the current-flow closeness of a vertex group `S` is
//!
//! ```text
//! C(S) = n / Σ_{u ∈ V} ε(u, S) = n / tr(L_{-S}^{-1})
//! ```
//!
//! where `L_{-S}` is the grounded Laplacian: the principal submatrix of the
//! graph Laplacian with the rows and columns of `S` removed. This crate
//! selects `k`-vertex groups maximizing `C(S)`, equivalently minimizing the
//! supermodular set function `tr(L_{-S}^{-1})`, with two greedy algorithms:
//!
//! * [`greedy_exact::exact_greedy`]: deterministic `O(n³)` greedy that keeps
//!   a dense inverse of the grounded Laplacian up to date across steps with
//!   rank-1 updates.
//! * [`greedy_approx::approx_greedy`]: randomized nearly-linear greedy that
//!   replaces every dense inverse by Johnson-Lindenstrauss sketches of
//!   resistance embeddings, solved row by row with preconditioned CG.
//!
//! Module layout:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | edge-list parsing, validation, largest connected component |
//! | [`laplacian`] | Laplacian assembly, grounding, dense inversion, PCG solves, trace estimation |
//! | [`centrality`] | exact group closeness, effective-resistance sums, marginal gains |
//! | [`greedy_exact`] | the `O(n³)` greedy |
//! | [`sketch`] | JL projections, sketched resistance sums and marginal gains |
//! | [`greedy_approx`] | the sketch-based greedy |
//! | [`oracle`] | brute-force and naive reference implementations for tests |
//! | [`gen`] | seeded graph families for tests and benchmarks |

pub mod centrality;
pub mod gen;
pub mod graph;
pub mod greedy_approx;
pub mod greedy_exact;
pub mod laplacian;
pub mod oracle;
pub mod sketch;

pub use centrality::ClosenessValue;
pub use graph::{Graph, VertexMap};
pub use greedy_exact::Selection;
pub use laplacian::{DenseInverse, GroundedLaplacian, LaplacianMatrix};
pub use sketch::SketchConfig;

/// Default RNG seed used by CLI and tests.
pub const DEFAULT_SEED: u64 = 42;

/// Default JL projection multiplier: sketches use `ceil(jl_factor · ln n)` rows.
pub const DEFAULT_JL_FACTOR: f64 = 20.0;

/// Largest dimension accepted by the dense inversion paths.
pub const DEFAULT_DENSE_CAP: usize = 20_000;

/// Largest number of subsets the brute-force oracle will enumerate.
pub const DEFAULT_ENUM_CAP: u64 = 2_000_000;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Edge-list input could not be parsed; carries the 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// An operation's precondition was violated (empty set, k out of range, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The operation requires a connected graph.
    #[error("graph is not connected")]
    Disconnected,
    /// A dense O(n²)-memory path was asked for a dimension above its cap.
    #[error("dense path refused: dimension {dim} exceeds cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },
    /// The brute-force oracle was asked to enumerate too many subsets.
    #[error("enumeration refused: C({n}, {k}) exceeds cap {cap}")]
    EnumerationCapExceeded { n: usize, k: usize, cap: u64 },
    /// An iterative solve stopped before reaching its residual target.
    #[error("solver did not converge in {iters} iterations: residual {achieved:.3e} > target {target:.3e}")]
    SolverDidNotConverge {
        iters: usize,
        achieved: f64,
        target: f64,
    },
    /// A quantity that must be positive in exact arithmetic came out otherwise.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    /// A vertex label was not found in the graph's vertex map.
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
