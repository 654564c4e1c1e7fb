//! Regularization constants, the regularized objective `f_r`, and its
//! (truncated) gradient.
//!
//! The barrier constant `C = (1 + eps/2)^(1/beta)` and the per-constraint
//! factors `C * load^(1/beta)` overflow doubles for any realistic `eps`, so
//! everything is carried as natural-log exponents. The quantity the solvers
//! need per coordinate is the *scaled* gradient
//!
//! ```text
//! s_j = -1 + exp(P_j),   P_j = ln( sum_i A_ij exp(r_i) ) + w_j
//! r_i = ln C + ln(load_i) / beta
//! w_j = alpha/(1-alpha) * ln xh_j   (alpha != 1),   xh_j   (alpha = 1)
//! ```
//!
//! which equals `(1-alpha) * grad_j` for `alpha != 1` and `grad_j` at
//! `alpha = 1`. Because `s_j >= -1` by construction, truncation only ever
//! clips from above, and once `P_j` exceeds [`SATURATION_EXPONENT`] the clip
//! is decided without exponentiating.

use crate::error::{Error, Result};
use crate::matrix::check_len;
use crate::problem::{to_original, validate_covering, validate_packing, Instance};

/// Log-domain exponent above which values are treated as overflowing.
pub const SATURATION_EXPONENT: f64 = 700.0;

/// The three constants `f_r` depends on. Solvers build these from derived
/// parameters; tests may construct them directly with moderate values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    pub alpha: f64,
    pub beta: f64,
    pub log_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingRegParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// `ln C` with `C = (1 + eps/2)^(1/beta)`.
    pub log_c: f64,
    /// Mirror-map exponent, `alpha < 1` only.
    pub beta_prime: Option<f64>,
    /// Mirror step `h`, `alpha < 1` only.
    pub step: Option<f64>,
    pub iterations: u64,
}

impl PackingRegParams {
    pub fn barrier(&self) -> BarrierParams {
        BarrierParams {
            alpha: self.alpha,
            beta: self.beta,
            log_c: self.log_c,
        }
    }

    /// Additive step `beta/(4(1+beta))` of the `alpha = 1` update.
    pub fn additive_step(&self) -> f64 {
        self.beta / (4.0 * (1.0 + self.beta))
    }

    /// Coefficient `beta(1-alpha)/(4(1+alpha beta))` of the multiplicative
    /// `alpha > 1` update.
    pub fn multiplicative_step(&self) -> f64 {
        self.beta * (1.0 - self.alpha) / (4.0 * (1.0 + self.alpha * self.beta))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringRegParams {
    pub epsilon: f64,
    /// Fairness exponent actually used (after the `beta <= 0` reset).
    pub beta: f64,
    pub beta_prime: f64,
    pub step: f64,
    pub iterations: u64,
    /// The input beta was `<= 0` and got replaced.
    pub beta_was_reset: bool,
    /// `0 < beta < (eps/4)/ln(mn rho/eps)`: the cost guarantee assumes beta
    /// is at least this floor. The solve still runs with the given beta.
    pub below_floor: bool,
}

impl CoveringRegParams {
    /// The covering dual is the packing `f_r` with `alpha = 0`, `C = 1` and
    /// the fairness beta as barrier exponent.
    pub fn barrier(&self) -> BarrierParams {
        BarrierParams {
            alpha: 0.0,
            beta: self.beta,
            log_c: 0.0,
        }
    }
}

fn ceil_count(v: f64) -> u64 {
    let k = v.ceil();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

pub fn derive_packing_params(
    m: usize,
    n: usize,
    rho: f64,
    alpha: f64,
    epsilon: f64,
) -> Result<PackingRegParams> {
    validate_packing(alpha, epsilon)?;
    let (m, n) = (m as f64, n as f64);
    let beta = (epsilon / 4.0) / ((1.0 + alpha) * (4.0 * m * n * rho / epsilon).ln());
    let log_c = (1.0 + epsilon / 2.0).ln() / beta;

    let (beta_prime, step, iterations) = if alpha < 1.0 {
        let one_minus = 1.0 - alpha;
        let bp = one_minus * (epsilon / 4.0) / (n * rho / (1.0 - epsilon)).ln();
        let h = one_minus * beta * bp / (16.0 * epsilon * (1.0 + alpha * beta));
        let k = ceil_count(2.0 / (one_minus * h * epsilon));
        (Some(bp), Some(h), k)
    } else if alpha == 1.0 {
        let l = (8.0 * rho * m * n / epsilon).ln();
        (None, None, ceil_count(10.0 * l * l / (epsilon * beta)))
    } else {
        let d = (alpha - 1.0).min(1.0);
        let num = 800.0 * (1.0 + alpha).powi(2) * (n * rho / (epsilon * d)).ln();
        (None, None, ceil_count(num / (beta * d)))
    };

    Ok(PackingRegParams {
        alpha,
        epsilon,
        beta,
        log_c,
        beta_prime,
        step,
        iterations,
    })
}

pub fn derive_covering_params(
    m: usize,
    n: usize,
    rho: f64,
    beta: f64,
    epsilon: f64,
) -> Result<CoveringRegParams> {
    validate_covering(beta, epsilon)?;
    let log_size = (m as f64 * n as f64 * rho / epsilon).ln();
    let floor = (epsilon / 4.0) / log_size;
    let beta_was_reset = beta <= 0.0;
    let beta = if beta_was_reset { floor } else { beta };
    let beta_prime = (epsilon / 4.0) / ((1.0 + beta) * log_size);
    let step = beta * beta_prime / (16.0 * epsilon);
    let iterations = 1 + ceil_count(2.0 / (step * epsilon));
    Ok(CoveringRegParams {
        epsilon,
        beta,
        beta_prime,
        step,
        iterations,
        beta_was_reset,
        below_floor: !beta_was_reset && beta < floor,
    })
}

/// Value of `f_r`, or a marker when the barrier term overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrValue {
    Finite(f64),
    PositiveOverflow,
}

impl FrValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            FrValue::Finite(v) => Some(v),
            FrValue::PositiveOverflow => None,
        }
    }
}

/// One coordinate of `grad f_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradEntry {
    Finite(f64),
    /// The scaled gradient is certainly above 1; its value was not formed.
    Saturated,
}

impl GradEntry {
    pub fn value(self) -> Option<f64> {
        match self {
            GradEntry::Finite(v) => Some(v),
            GradEntry::Saturated => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub grad: Vec<GradEntry>,
    /// Scaled and truncated gradient, every entry in `[-1, 1]`.
    pub truncated: Vec<f64>,
    /// `ln (A F_alpha(xh))_i`, `-inf` for idle constraints.
    pub log_loads: Vec<f64>,
}

/// `ln C + ln(load)/beta`, the log of the dual factor of one constraint.
#[inline]
pub fn row_log_factor(load: f64, bp: &BarrierParams) -> f64 {
    if load > 0.0 {
        bp.log_c + load.ln() / bp.beta
    } else {
        f64::NEG_INFINITY
    }
}

/// Log of the positive part of the scaled gradient of one coordinate.
///
/// `column` yields `(A_ij, r_i)` for the incident constraints in increasing
/// row order. The round engine calls this with the same inputs as the
/// monolithic solver, which is what makes the two bit-identical.
#[inline]
pub fn coordinate_log_pressure<I>(column: I, x_hat_j: f64, alpha: f64) -> f64
where
    I: Iterator<Item = (f64, f64)> + Clone,
{
    let peak = column
        .clone()
        .map(|(_, r)| r)
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = column.map(|(a, r)| a * (r - peak).exp()).sum();
    let weight = if alpha == 1.0 {
        x_hat_j
    } else if alpha == 0.0 {
        0.0
    } else {
        alpha / (1.0 - alpha) * x_hat_j.ln()
    };
    peak + sum.ln() + weight
}

/// Scaled gradient `s = exp(P) - 1` from its log pressure, truncated to 1.
/// Returns `(entry, truncated)` where `entry` is the unscaled gradient.
#[inline]
pub fn gradient_from_pressure(pressure: f64, alpha: f64) -> (GradEntry, f64) {
    if pressure > SATURATION_EXPONENT {
        return (GradEntry::Saturated, 1.0);
    }
    let scaled = pressure.exp_m1();
    let grad = if alpha == 1.0 {
        scaled
    } else {
        scaled / (1.0 - alpha)
    };
    (GradEntry::Finite(grad), scaled.min(1.0))
}

/// Truncation of a single gradient entry: scales by `1 - alpha` (identity
/// at `alpha = 1`) and clips values above 1.
pub fn truncate(grad: GradEntry, alpha: f64) -> Result<f64> {
    let g = match grad {
        GradEntry::Saturated => return Ok(1.0),
        GradEntry::Finite(g) => g,
    };
    let s = if alpha == 1.0 { g } else { (1.0 - alpha) * g };
    if s > 1.0 {
        Ok(1.0)
    } else if s >= -1.0 {
        Ok(s)
    } else {
        Err(Error::TruncationDomainViolation(s))
    }
}

pub(crate) fn check_domain(x_hat: &[f64], alpha: f64) -> Result<()> {
    let bad = if alpha == 1.0 {
        x_hat.iter().position(|v| !v.is_finite())
    } else {
        x_hat.iter().position(|v| !(*v > 0.0 && v.is_finite()))
    };
    match bad {
        Some(i) => Err(Error::DomainError(format!(
            "transformed coordinate {i} is {} (alpha = {alpha})",
            x_hat[i]
        ))),
        None => Ok(()),
    }
}

/// `A F_alpha(xh)` for a transformed point.
pub fn transformed_loads(instance: &Instance, x_hat: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_len(instance.n(), x_hat.len())?;
    check_domain(x_hat, alpha)?;
    let u: Vec<f64> = x_hat.iter().map(|&v| to_original(v, alpha)).collect();
    instance.matrix().mul_vec(&u)
}

/// `-<1, xh>/(1-alpha)` (or `-<1, xh>` at `alpha = 1`).
pub(crate) fn linear_part(x_hat: &[f64], alpha: f64) -> f64 {
    let total: f64 = x_hat.iter().sum();
    if alpha == 1.0 {
        -total
    } else {
        -total / (1.0 - alpha)
    }
}

/// Barrier term `beta/(1+beta) * sum_i C load_i^((1+beta)/beta)` from loads.
pub(crate) fn barrier_from_loads(loads: &[f64], bp: &BarrierParams) -> FrValue {
    let power = (1.0 + bp.beta) / bp.beta;
    let exps: Vec<f64> = loads
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| bp.log_c + power * l.ln())
        .collect();
    let peak = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return FrValue::Finite(0.0);
    }
    let coef = bp.beta / (1.0 + bp.beta);
    let log_total = coef.ln() + peak + exps.iter().map(|e| (e - peak).exp()).sum::<f64>().ln();
    if log_total > SATURATION_EXPONENT {
        return FrValue::PositiveOverflow;
    }
    FrValue::Finite(coef * exps.iter().map(|e| e.exp()).sum::<f64>())
}

/// `f_r` from precomputed loads of `xh`.
pub(crate) fn f_r_from_loads(x_hat: &[f64], loads: &[f64], bp: &BarrierParams) -> FrValue {
    match barrier_from_loads(loads, bp) {
        FrValue::Finite(b) => FrValue::Finite(linear_part(x_hat, bp.alpha) + b),
        FrValue::PositiveOverflow => FrValue::PositiveOverflow,
    }
}

/// The regularized objective
/// `f_r(xh) = -fhat(xh) + beta/(1+beta) * sum_i C (A F_alpha(xh))_i^((1+beta)/beta)`.
pub fn f_r_value(instance: &Instance, bp: &BarrierParams, x_hat: &[f64]) -> Result<FrValue> {
    let loads = transformed_loads(instance, x_hat, bp.alpha)?;
    Ok(f_r_from_loads(x_hat, &loads, bp))
}

/// Fills `factors` with `r_i` for every constraint.
pub(crate) fn row_factors_into(loads: &[f64], bp: &BarrierParams, factors: &mut [f64]) {
    for (r, &l) in factors.iter_mut().zip(loads) {
        *r = row_log_factor(l, bp);
    }
}

/// Gradient and truncated gradient of `f_r` at `xh`.
pub fn grad_f_r(instance: &Instance, bp: &BarrierParams, x_hat: &[f64]) -> Result<GradientPair> {
    let loads = transformed_loads(instance, x_hat, bp.alpha)?;
    let mut factors = vec![0.0; loads.len()];
    row_factors_into(&loads, bp, &mut factors);
    let a = instance.matrix();
    let (grad, truncated) = (0..instance.n())
        .map(|j| {
            let p =
                coordinate_log_pressure(a.col(j).map(|(i, v)| (v, factors[i])), x_hat[j], bp.alpha);
            gradient_from_pressure(p, bp.alpha)
        })
        .unzip();
    Ok(GradientPair {
        grad,
        truncated,
        log_loads: loads.iter().map(|l| l.ln()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseNonnegMatrix;
    use crate::problem::standardize;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_by_one() -> Instance {
        standardize(&SparseNonnegMatrix::identity(1).unwrap()).0
    }

    #[test]
    fn packing_params_examples() {
        let p = derive_packing_params(10, 10, 1.0, 1.0, 0.1).unwrap();
        let beta = 0.025 / (2.0 * 4000f64.ln());
        assert_relative_eq!(p.beta, beta, max_relative = 1e-15);
        assert_relative_eq!(p.beta, 1.5071e-3, max_relative = 1e-4);
        assert_relative_eq!(p.log_c, 1.05f64.ln() / beta, max_relative = 1e-15);
        assert_relative_eq!(p.log_c, 32.374, max_relative = 1e-4);
        assert!(p.beta_prime.is_none() && p.step.is_none());

        let p = derive_packing_params(1, 1, 1.0, 0.0, 0.1).unwrap();
        assert_relative_eq!(p.beta, 6.7770e-3, max_relative = 1e-4);
        assert_relative_eq!(p.beta_prime.unwrap(), 0.23727, max_relative = 1e-4);

        assert!(matches!(
            derive_packing_params(1, 1, 1.0, 2.0, 0.2),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        assert!(matches!(
            derive_packing_params(1, 1, 1.0, -1.0, 0.1),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn covering_params_examples() {
        let p = derive_covering_params(1, 1, 1.0, 1.0, 0.1).unwrap();
        assert_relative_eq!(p.beta_prime, 5.4287e-3, max_relative = 1e-4);
        assert_relative_eq!(p.step, 3.3929e-3, max_relative = 1e-4);
        assert_eq!(p.iterations, 5896);
        assert!(!p.beta_was_reset && !p.below_floor);

        let p = derive_covering_params(1, 1, 1.0, 0.0, 0.1).unwrap();
        assert!(p.beta_was_reset);
        assert_relative_eq!(p.beta, 1.0858e-2, max_relative = 1e-4);
        let q = derive_covering_params(1, 1, 1.0, -3.0, 0.1).unwrap();
        assert_eq!(p.beta, q.beta);
        assert_eq!(p.iterations, q.iterations);

        let low = derive_covering_params(1, 1, 1.0, 1e-3, 0.1).unwrap();
        assert!(low.below_floor);
        assert_eq!(low.beta, 1e-3);

        assert!(derive_covering_params(1, 1, 1.0, 1.0, 0.7).is_err());
    }

    #[test]
    fn derive_is_pure() {
        for alpha in [0.0, 0.4, 1.0, 1.7] {
            let a = derive_packing_params(7, 3, 12.5, alpha, 0.05).unwrap();
            let b = derive_packing_params(7, 3, 12.5, alpha, 0.05).unwrap();
            assert_eq!(a.beta.to_bits(), b.beta.to_bits());
            assert_eq!(a.log_c.to_bits(), b.log_c.to_bits());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn f_r_examples() {
        let inst = one_by_one();
        let bp = derive_packing_params(1, 1, 1.0, 0.0, 0.1)
            .unwrap()
            .barrier();
        // exponent (ln 1.05 + ln 0.5)/beta is about -95
        let v = f_r_value(&inst, &bp, &[0.5]).unwrap().finite().unwrap();
        assert!((v + 0.5).abs() < 1e-40);

        let v = f_r_value(&inst, &bp, &[2.0]).unwrap();
        match v {
            FrValue::Finite(x) => assert!(x > 1e40),
            FrValue::PositiveOverflow => {}
        }

        // tiny point: both terms vanish
        let v = f_r_value(&inst, &bp, &[1e-300]).unwrap().finite().unwrap();
        assert!(v.abs() < 1e-299);

        // far outside: marker rather than inf
        assert_eq!(
            f_r_value(&inst, &bp, &[1e3]).unwrap(),
            FrValue::PositiveOverflow
        );
        assert!(matches!(
            f_r_value(&inst, &bp, &[0.0]),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn gradient_examples() {
        let inst = one_by_one();
        let bp = derive_packing_params(1, 1, 1.0, 0.0, 0.1)
            .unwrap()
            .barrier();
        let g = grad_f_r(&inst, &bp, &[0.5]).unwrap();
        assert_relative_eq!(g.grad[0].value().unwrap(), -1.0, max_relative = 1e-30);
        assert_eq!(g.truncated[0], -1.0);
        assert_relative_eq!(g.log_loads[0], 0.5f64.ln());

        let g = grad_f_r(&inst, &bp, &[1.0]).unwrap();
        assert_eq!(g.truncated[0], 1.0);

        let g = grad_f_r(&inst, &bp, &[1e3]).unwrap();
        assert_eq!(g.grad[0], GradEntry::Saturated);
        assert_eq!(g.truncated[0], 1.0);
    }

    #[test]
    fn truncate_examples() {
        assert_eq!(truncate(GradEntry::Finite(0.5), 0.0).unwrap(), 0.5);
        assert_eq!(truncate(GradEntry::Finite(7.0), 0.0).unwrap(), 1.0);
        assert_eq!(truncate(GradEntry::Finite(0.3), 2.0).unwrap(), -0.3);
        assert_eq!(truncate(GradEntry::Saturated, 2.0).unwrap(), 1.0);
        assert_eq!(truncate(GradEntry::Finite(0.8), 1.0).unwrap(), 0.8);
        assert!(matches!(
            truncate(GradEntry::Finite(-1.5), 0.0),
            Err(Error::TruncationDomainViolation(_))
        ));
    }

    // Direct evaluation with C and load^(1/beta) materialized; only usable
    // with moderate injected parameters.
    fn naive_f_r(a: &[Vec<f64>], bp: &BarrierParams, xh: &[f64]) -> f64 {
        let u: Vec<f64> = xh.iter().map(|&v| to_original(v, bp.alpha)).collect();
        let c = bp.log_c.exp();
        let lin: f64 = if bp.alpha == 1.0 {
            -xh.iter().sum::<f64>()
        } else {
            -xh.iter().sum::<f64>() / (1.0 - bp.alpha)
        };
        let barrier: f64 = a
            .iter()
            .map(|row| {
                let load: f64 = row.iter().zip(&u).map(|(p, q)| p * q).sum();
                c * load.powf((1.0 + bp.beta) / bp.beta)
            })
            .sum();
        lin + bp.beta / (1.0 + bp.beta) * barrier
    }

    fn naive_grad(a: &[Vec<f64>], bp: &BarrierParams, xh: &[f64]) -> Vec<f64> {
        let u: Vec<f64> = xh.iter().map(|&v| to_original(v, bp.alpha)).collect();
        let c = bp.log_c.exp();
        let loads: Vec<f64> = a
            .iter()
            .map(|row| row.iter().zip(&u).map(|(p, q)| p * q).sum())
            .collect();
        (0..xh.len())
            .map(|j| {
                let inner: f64 = a
                    .iter()
                    .zip(&loads)
                    .map(|(row, l)| row[j] * c * l.powf(1.0 / bp.beta))
                    .sum();
                if bp.alpha == 1.0 {
                    -1.0 + xh[j].exp() * inner
                } else {
                    (-1.0 + xh[j].powf(bp.alpha / (1.0 - bp.alpha)) * inner) / (1.0 - bp.alpha)
                }
            })
            .collect()
    }

    fn random_instance(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (Instance, Vec<Vec<f64>>) {
        loop {
            let dense: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if rng.random_bool(0.7) {
                                rng.random_range(1.0..4.0)
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            if let Ok(a) = SparseNonnegMatrix::from_dense(&dense) {
                let (inst, _) = standardize(&a);
                return (inst.clone(), inst.matrix().to_dense());
            }
        }
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize, alpha: f64) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random_range(0.05..0.4);
                crate::problem::to_transformed(u, alpha)
            })
            .collect()
    }

    #[test]
    fn log_domain_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let bp = BarrierParams {
                alpha,
                beta: 0.5,
                log_c: 0.3,
            };
            for _ in 0..20 {
                let (inst, dense) = random_instance(&mut rng, 3, 3);
                let xh = random_point(&mut rng, 3, alpha);
                let fast = f_r_value(&inst, &bp, &xh).unwrap().finite().unwrap();
                let slow = naive_f_r(&dense, &bp, &xh);
                assert_relative_eq!(fast, slow, max_relative = 1e-10);
                let g = grad_f_r(&inst, &bp, &xh).unwrap();
                for (a, b) in g.grad.iter().zip(naive_grad(&dense, &bp, &xh)) {
                    assert_relative_eq!(
                        a.value().unwrap(),
                        b,
                        max_relative = 1e-10,
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let bp = BarrierParams {
                alpha,
                beta: 0.5,
                log_c: 0.0,
            };
            for _ in 0..20 {
                let (inst, _) = random_instance(&mut rng, 3, 3);
                let xh = random_point(&mut rng, 3, alpha);
                let g = grad_f_r(&inst, &bp, &xh).unwrap();
                for j in 0..3 {
                    let h = 1e-6 * xh[j].abs().max(1e-2);
                    let mut hi = xh.clone();
                    let mut lo = xh.clone();
                    hi[j] += h;
                    lo[j] -= h;
                    let fd = (f_r_value(&inst, &bp, &hi).unwrap().finite().unwrap()
                        - f_r_value(&inst, &bp, &lo).unwrap().finite().unwrap())
                        / (2.0 * h);
                    let an = g.grad[j].value().unwrap();
                    assert!(
                        (fd - an).abs() <= 1e-6 * an.abs().max(1.0),
                        "alpha {alpha} j {j}: fd {fd} vs analytic {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn truncated_equals_scaled_inside_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let bp = BarrierParams {
                alpha,
                beta: 0.5,
                log_c: 0.0,
            };
            for _ in 0..20 {
                let (inst, _) = random_instance(&mut rng, 3, 3);
                let xh = random_point(&mut rng, 3, alpha);
                let g = grad_f_r(&inst, &bp, &xh).unwrap();
                for j in 0..3 {
                    let s = truncate(g.grad[j], alpha).unwrap();
                    assert_eq!(s, g.truncated[j]);
                }
            }
        }
    }

    #[test]
    fn barrier_is_monotone_in_loads() {
        let bp = BarrierParams {
            alpha: 0.5,
            beta: 0.2,
            log_c: 1.0,
        };
        let base = [0.3, 0.6, 0.0];
        let b0 = barrier_from_loads(&base, &bp).finite().unwrap();
        for i in 0..3 {
            let mut up = base;
            up[i] += 0.05;
            assert!(barrier_from_loads(&up, &bp).finite().unwrap() > b0);
        }
    }

    proptest! {
        #[test]
        fn truncated_in_band(xh in prop::collection::vec(1e-4f64..50.0, 2), alpha in prop::sample::select(vec![0.0, 0.3, 1.0, 1.5, 4.0])) {
            let inst = standardize(&SparseNonnegMatrix::from_dense(&[vec![1.0, 3.0], vec![2.0, 0.0]]).unwrap()).0;
            let bp = derive_packing_params(2, 2, 3.0, alpha, 0.03).unwrap().barrier();
            let xh: Vec<f64> = if alpha == 1.0 { xh.iter().map(|v| v.ln()).collect() } else { xh };
            let g = grad_f_r(&inst, &bp, &xh).unwrap();
            for t in g.truncated {
                prop_assert!((-1.0..=1.0).contains(&t));
            }
        }
    }
}
