//! Shared test fixtures: seeded random instances and hand-derived optima.
//!
//! The reference optima here are written out from the KKT conditions
//! directly and deliberately do not call into `fairalloc::oracle`.
#![allow(dead_code)]

use fairalloc::{standardize, Instance, SparseNonnegMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHAS: [f64; 6] = [0.0, 0.3, 0.9, 1.0, 1.5, 3.0];

pub fn instance(rows: &[Vec<f64>]) -> Instance {
    standardize(&SparseNonnegMatrix::from_dense(rows).unwrap()).0
}

pub fn identity(n: usize) -> Instance {
    standardize(&SparseNonnegMatrix::identity(n).unwrap()).0
}

/// A sparse instance with `m, n <= max_dim` and entries in `[1, width]`,
/// every row and column nonempty.
pub fn random_matrix(seed: u64, max_dim: usize, width: f64) -> SparseNonnegMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=max_dim);
    let n = rng.random_range(1..=max_dim);
    let density = rng.random_range(0.05..0.3);
    let mut entries = std::collections::BTreeMap::new();
    let value = |rng: &mut ChaCha8Rng| width.powf(rng.random::<f64>());
    for i in 0..m {
        for j in 0..n {
            if rng.random::<f64>() < density {
                let v = value(&mut rng);
                entries.insert((i, j), v);
            }
        }
    }
    for i in 0..m {
        let j = rng.random_range(0..n);
        let v = value(&mut rng);
        entries.entry((i, j)).or_insert(v);
    }
    for j in 0..n {
        let i = rng.random_range(0..m);
        let v = value(&mut rng);
        entries.entry((i, j)).or_insert(v);
    }
    // Pin both ends of the range so the width is exactly `width`.
    let keys: Vec<_> = entries.keys().copied().collect();
    entries.insert(keys[0], 1.0);
    if keys.len() > 1 {
        entries.insert(keys[keys.len() - 1], width);
    }
    SparseNonnegMatrix::from_triplets(m, n, entries.into_iter().map(|((i, j), v)| (i, j, v)))
        .unwrap()
}

pub fn random_instance(seed: u64, max_dim: usize, width: f64) -> Instance {
    standardize(&random_matrix(seed, max_dim, width)).0
}

/// `f_alpha` written out directly.
pub fn utility(x: &[f64], alpha: f64) -> f64 {
    if alpha == 1.0 {
        x.iter().map(|v| v.ln()).sum()
    } else {
        x.iter().map(|v| v.powf(1.0 - alpha)).sum::<f64>() / (1.0 - alpha)
    }
}

pub fn cost(y: &[f64], beta: f64) -> f64 {
    y.iter().map(|v| v.powf(1.0 + beta)).sum::<f64>() / (1.0 + beta)
}

/// Optimum utility of `max f_alpha(x)` s.t. `sum_j a_j x_j <= 1`.
///
/// Stationarity `x_j^(-alpha) = lambda a_j` with a tight constraint gives
/// `x_j = a_j^(-1/alpha) / sum_k a_k^(1 - 1/alpha)`.
pub fn single_row_optimum(a: &[f64], alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0 / a.iter().copied().fold(f64::INFINITY, f64::min);
    }
    let norm: f64 = a.iter().map(|v| v.powf(1.0 - 1.0 / alpha)).sum();
    let x: Vec<f64> = a.iter().map(|v| v.powf(-1.0 / alpha) / norm).collect();
    utility(&x, alpha)
}

/// Optimum utility when constraint `j` reads `d_j x_j <= 1`.
pub fn diagonal_optimum(d: &[f64], alpha: f64) -> f64 {
    let x: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    utility(&x, alpha)
}

/// Optimum cost of `min g_beta(y)` s.t. `sum_i a_i y_i >= 1`:
/// `y_i^beta = mu^beta a_i`, tight, so `y_i = a_i^(1/beta) / sum_k a_k^(1+1/beta)`.
pub fn single_column_cost(a: &[f64], beta: f64) -> f64 {
    let norm: f64 = a.iter().map(|v| v.powf(1.0 + 1.0 / beta)).sum();
    let y: Vec<f64> = a.iter().map(|v| v.powf(1.0 / beta) / norm).collect();
    cost(&y, beta)
}
