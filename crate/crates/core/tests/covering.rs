mod common;

use approx::assert_relative_eq;
use common::*;
use fairalloc::covering::{init_covering, step_covering};
use fairalloc::{covering_residual, solve_covering, standardize, SolverConfig, SparseNonnegMatrix};
use proptest::prelude::*;

#[test]
fn single_column_meets_cost_bound() {
    let raw = SparseNonnegMatrix::from_dense(&[vec![1.0], vec![2.0]]).unwrap();
    let s = solve_covering(
        &standardize(&raw).0,
        &SolverConfig::covering(1.0, 0.1).unwrap(),
    )
    .unwrap();
    let opt = single_column_cost(&[1.0, 2.0], 1.0);
    assert!(s.cost_avg <= (1.0 + 3.0 * 0.1 * 2.0) * opt);
    assert!(s.pre_scale_residual >= 0.95);
    assert!(s.min_load >= 1.0);
    assert!(s.warnings.is_empty());
}

#[test]
fn returned_vector_is_scaled_average() {
    let s = solve_covering(&identity(2), &SolverConfig::covering(1.0, 0.1).unwrap()).unwrap();
    for (y, avg) in s.y.iter().zip(&s.y_avg) {
        assert_relative_eq!(*y, 1.1 * avg, max_relative = 1e-15);
    }
    assert_relative_eq!(s.cost, cost(&s.y, 1.0), max_relative = 1e-12);
    assert_relative_eq!(s.cost_avg, cost(&s.y_avg, 1.0), max_relative = 1e-12);
}

#[test]
fn reset_beta_is_reported() {
    let config = SolverConfig::covering(-1.0, 0.2)
        .unwrap()
        .with_max_iters(50);
    let s = solve_covering(&identity(2), &config).unwrap();
    assert!(s.params.beta_was_reset);
    assert!(s.params.beta > 0.0);
    assert!(s.warnings.iter().any(|w| w.contains("replaced")));
}

#[test]
fn short_override_warns_instead_of_failing() {
    let config = SolverConfig::covering(1.0, 0.1).unwrap().with_max_iters(3);
    let s = solve_covering(&identity(3), &config).unwrap();
    assert_eq!(s.iterations_run, 3);
    assert!(s.pre_scale_residual < 0.95);
    assert!(s
        .warnings
        .iter()
        .any(|w| w.contains("pre-scale certificate")));
}

#[test]
fn scaled_matrix_scales_the_answer() {
    let config = SolverConfig::covering(1.0, 0.1)
        .unwrap()
        .with_max_iters(500);
    let base = solve_covering(&identity(2), &config).unwrap();
    let raw = SparseNonnegMatrix::from_triplets(2, 2, [(0, 0, 4.0), (1, 1, 4.0)]).unwrap();
    let scaled = solve_covering(&standardize(&raw).0, &config).unwrap();
    for (a, b) in base.y.iter().zip(&scaled.y) {
        assert_relative_eq!(*a, 4.0 * b, max_relative = 1e-14);
    }
    assert_relative_eq!(base.min_load, scaled.min_load, max_relative = 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_matches_direct_product(seed in 0u64..10_000) {
        let raw = random_matrix(seed, 12, 30.0);
        let inst = standardize(&raw).0;
        let y: Vec<f64> = (0..raw.rows()).map(|i| 0.1 + i as f64 / 7.0).collect();
        let r = covering_residual(&inst, &y).unwrap();
        let direct = inst.matrix().transpose_mul_vec(&y).unwrap();
        let min = direct.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.min_load, min);
        let violated: Vec<usize> = (0..direct.len()).filter(|&j| direct[j] < 1.0).collect();
        prop_assert_eq!(r.violated_columns, violated);
    }

    #[test]
    fn average_stays_positive_and_finite(seed in 0u64..10_000, beta in 0.05f64..3.0) {
        let inst = random_instance(seed, 12, 30.0);
        let mut state = init_covering(&inst, &SolverConfig::covering(beta, 0.2).unwrap()).unwrap();
        for _ in 0..300 {
            step_covering(&mut state, &inst).unwrap();
        }
        prop_assert!(state.y_avg().iter().all(|v| *v > 0.0 && v.is_finite()));
        prop_assert!(state.x().iter().all(|v| *v > 0.0 && v.is_finite()));
        prop_assert!(state.last_truncated().iter().all(|t| (-1.0..=1.0).contains(t)));
    }
}
