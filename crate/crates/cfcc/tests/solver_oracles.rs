//! Cross-checks between the production linear algebra (faer Cholesky, PCG,
//! rank-1 maintenance) and an independent eigendecomposition oracle.

use cfcc::centrality::er_sum_exact;
use cfcc::gen;
use cfcc::graph::Graph;
use cfcc::laplacian::{
    assemble, dense_inverse, ground, pseudoinverse, sddm_split, Preconditioner, SolveOptions,
};
use cfcc::oracle::eigen_pseudoinverse;
use ndarray::Array2;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn corpus() -> Vec<Graph> {
    vec![
        gen::path(7),
        gen::cycle(9),
        gen::star(8),
        gen::complete_bipartite(3, 4),
        gen::petersen(),
        gen::erdos_renyi_connected(11, 0.35, 5),
        gen::erdos_renyi_weighted_connected(12, 0.4, 0.5, 2.0, 3),
        gen::erdos_renyi_weighted_connected(13, 0.3, 0.1, 10.0, 8),
    ]
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[test]
fn pseudoinverse_matches_eigensolver_oracle() {
    for g in corpus() {
        let l = assemble(&g);
        let fast = pseudoinverse(&l, 1000).unwrap();
        let slow = eigen_pseudoinverse(&l.dense()).unwrap();
        let diff = max_abs_diff(&fast, &slow);
        assert!(diff <= 1e-8, "n={} diff={diff:e}", g.n());
    }
}

#[test]
fn pcg_solve_matches_dense_grounded_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for g in corpus() {
        let l = assemble(&g);
        let s: Vec<usize> = rand::seq::index::sample(&mut rng, g.n(), 2).into_vec();
        let gl = ground(&l, &s).unwrap();
        let inv = dense_inverse(&gl, 1000).unwrap();
        let b: Vec<f64> = (0..gl.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let expected = inv.apply(&b);

        for pre in [Preconditioner::Jacobi, Preconditioner::Ic0, Preconditioner::None] {
            let opts = SolveOptions::m_norm(1e-10).with_preconditioner(pre);
            let x = gl.solve(&b, &opts).unwrap();
            let worst = x
                .iter()
                .zip(&expected)
                .map(|(a, e)| (a - e).abs())
                .fold(0.0_f64, f64::max);
            assert!(worst <= 1e-6, "n={} pre={pre:?} worst={worst:e}", g.n());
        }
    }
}

#[test]
fn singular_solve_recovers_zero_sum_solution() {
    let g = gen::erdos_renyi_weighted_connected(25, 0.2, 0.5, 3.0, 21);
    let l = assemble(&g);
    let ldag = pseudoinverse(&l, 1000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut b: Vec<f64> = (0..g.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    for v in &mut b {
        *v -= mean;
    }
    let x = l.solve(&b, &SolveOptions::m_norm(1e-10)).unwrap();
    for (i, xi) in x.iter().enumerate() {
        let want: f64 = (0..g.n()).map(|j| ldag[[i, j]] * b[j]).sum();
        assert!((xi - want).abs() <= 1e-6, "entry {i}: {xi} vs {want}");
    }
}

#[test]
fn incidence_reconstructs_the_laplacian() {
    for g in corpus() {
        let l = assemble(&g);
        let inc = cfcc::laplacian::IncidenceFactorization::from_graph(&g);
        assert!(max_abs_diff(&inc.btwb_dense(), &l.dense()) <= 1e-12);
    }
}

#[test]
fn sddm_split_reconstructs_the_grounded_matrix() {
    for g in corpus() {
        let l = assemble(&g);
        let gl = ground(&l, &[0, g.n() / 2]).unwrap();
        let split = sddm_split(&gl);
        let mut rebuilt = split.incidence.btwb_dense();
        for (i, &x) in split.x.iter().enumerate() {
            rebuilt[[i, i]] += x;
        }
        assert!(max_abs_diff(&rebuilt, &gl.dense()) <= 1e-12);
    }
}

#[test]
fn grounded_inverse_is_entrywise_nonnegative() {
    // The grounded Laplacian of a connected graph is a nonsingular M-matrix,
    // so its inverse is entrywise nonnegative with a positive diagonal, and
    // strictly positive when the retained vertices stay connected.
    for g in corpus() {
        let l = assemble(&g);
        let gl = ground(&l, &[1]).unwrap();
        let inv = dense_inverse(&gl, 1000).unwrap();
        let min = inv.mat().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= 0.0, "n={} min entry {min}", g.n());
        for j in 0..inv.dim() {
            assert!(inv.mat()[[j, j]] > 0.0);
        }
    }

    // Removing one vertex of a cycle leaves a path, which is connected.
    let l = assemble(&gen::cycle(9));
    let inv = dense_inverse(&ground(&l, &[0]).unwrap(), 1000).unwrap();
    let min = inv.mat().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 0.0, "cycle min entry {min}");
}

#[test]
fn chained_rank1_updates_match_fresh_inversions() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for trial in 0..20 {
        let n = 10 + (trial % 6);
        let g = if trial % 2 == 0 {
            gen::erdos_renyi_connected(n, 0.4, 100 + trial as u64)
        } else {
            gen::erdos_renyi_weighted_connected(n, 0.4, 0.25, 4.0, 100 + trial as u64)
        };
        let l = assemble(&g);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut grounded = vec![order[0]];
        let mut inv = dense_inverse(&ground(&l, &grounded).unwrap(), 1000).unwrap();
        for &u in order.iter().take(5).skip(1) {
            inv = inv.rank1_ground_update(u).unwrap();
            grounded.push(u);
            let fresh = dense_inverse(&ground(&l, &grounded).unwrap(), 1000).unwrap();
            let diff = max_abs_diff(inv.mat(), fresh.mat());
            assert!(diff <= 1e-8, "trial {trial} |S|={} diff={diff:e}", grounded.len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pseudoinverse_properties_hold(
        n in 4_usize..14,
        p in 0.25_f64..0.8,
        seed in 0_u64..5000,
        weighted in any::<bool>(),
    ) {
        let g = if weighted {
            gen::erdos_renyi_weighted_connected(n, p, 0.5, 2.0, seed)
        } else {
            gen::erdos_renyi_connected(n, p, seed)
        };
        let l = assemble(&g);
        let ldag = pseudoinverse(&l, 1000).unwrap();

        // Rows of the pseudoinverse sum to zero (the all-ones kernel).
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| ldag[[i, j]]).sum();
            prop_assert!(row_sum.abs() <= 1e-9);
        }

        // L† L L† = L†.
        let ld = l.dense();
        let back = ldag.dot(&ld).dot(&ldag);
        prop_assert!(max_abs_diff(&back, &ldag) <= 1e-8);

        // The resistance-sum identity: sum over v of
        // (L†[u,u] + L†[v,v] - 2 L†[u,v]) equals n·L†[u,u] + tr(L†).
        let sums = er_sum_exact(&g, &ldag);
        for u in 0..n {
            let pairwise: f64 = (0..n)
                .map(|v| ldag[[u, u]] + ldag[[v, v]] - 2.0 * ldag[[u, v]])
                .sum();
            prop_assert!((pairwise - sums[u]).abs() <= 1e-8 * sums[u].abs().max(1.0));
        }
    }
}
