use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starset::conic::{min_eigenvalue, solve, ConicProblem, ConicStatus, LinearRow, SolverOptions};

const FEAS_TOL: f64 = 1e-8;
const INFEAS_TOL: f64 = 1e-9;

/// `k x k` PSD block with `m` random equality rows satisfied by a random PSD matrix.
fn feasible_sdp(k: usize, m: usize, seed: u64) -> ConicProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
    let x0 = &b * b.transpose() + DMatrix::identity(k, k) * 0.05;
    let mut p = ConicProblem::new();
    let blk = p.add_psd_block(k);
    let blk = p.psd_blocks[blk].clone();
    for _ in 0..m {
        let mut coeffs = Vec::new();
        let mut rhs = 0.0;
        for i in 0..k {
            for j in i..k {
                let a: f64 = rng.random_range(-1.0..1.0);
                coeffs.push((blk.var(i, j), a));
                rhs += a * x0[(i, j)];
            }
        }
        p.add_equality(LinearRow::new(coeffs, rhs));
    }
    // trace objective keeps the problem bounded
    p.set_objective((0..k).map(|i| (blk.var(i, i), 1.0)).collect());
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn feasible_solutions_pass_independent_check(k in 2usize..5, m in 1usize..4, seed in any::<u64>()) {
        let p = feasible_sdp(k, m, seed);
        let s = solve(&p, &SolverOptions::default()).unwrap();
        prop_assert!(s.status != ConicStatus::Infeasible);
        if s.is_feasible() {
            prop_assert!(p.primal_residual(&s.values) <= FEAS_TOL);
            prop_assert!(s.primal_residual <= FEAS_TOL);
            for blk in &p.psd_blocks {
                prop_assert!(min_eigenvalue(&blk.matrix(&s.values)) >= -FEAS_TOL);
            }
        }
    }

    #[test]
    fn contradictory_bounds_carry_farkas(lo in -5.0f64..5.0, gap in 1e-3f64..3.0, extra in 0usize..3) {
        // x >= lo + gap and x <= lo, plus harmless free variables
        let mut p = ConicProblem::new();
        let x = p.add_var();
        let others = p.add_vars(extra);
        p.add_inequality(LinearRow::new(vec![(x, -1.0)], -(lo + gap)));
        p.add_inequality(LinearRow::new(vec![(x, 1.0)], lo));
        for v in others {
            p.add_inequality(LinearRow::new(vec![(v, 1.0)], 1.0));
        }
        let s = solve(&p, &SolverOptions::default()).unwrap();
        prop_assert_eq!(s.status, ConicStatus::Infeasible);
        let f = s.farkas.unwrap();
        prop_assert!(f.margin >= INFEAS_TOL);
    }

    #[test]
    fn negative_diagonal_sdp_is_infeasible(k in 2usize..5, t in 1e-2f64..2.0) {
        let mut p = ConicProblem::new();
        let blk = p.add_psd_block(k);
        let blk = p.psd_blocks[blk].clone();
        p.add_equality(LinearRow::new(vec![(blk.var(0, 0), 1.0)], -t));
        let s = solve(&p, &SolverOptions::default()).unwrap();
        prop_assert_eq!(s.status, ConicStatus::Infeasible);
        prop_assert!(s.farkas.unwrap().margin >= INFEAS_TOL);
    }
}
