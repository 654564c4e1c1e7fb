//! Reference optima for testing.
//!
//! Closed forms cover instances whose KKT system can be solved by hand. A
//! damped-Newton barrier method handles small dense packing instances. None
//! of this shares code with the solvers: the Newton method works directly on
//! `x` with a logarithmic barrier, without any change of variables, power
//! barrier or truncation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::SparseNonnegMatrix;
use crate::problem::{f_alpha_value, g_beta_value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    ClosedForm,
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// `x*` for packing oracles, `y*` for covering oracles.
    pub point: Vec<f64>,
    /// `f_alpha(x*)` or `g_beta(y*)`.
    pub objective: f64,
    pub method: OracleMethod,
    /// Certified bound on the objective error; 0 for closed forms.
    pub accuracy: f64,
}

fn check_positive(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::DomainError(format!("{what} is empty")));
    }
    match v.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        Some(i) => Err(Error::DomainError(format!(
            "{what} entry {i} is {}; must be positive",
            v[i]
        ))),
        None => Ok(()),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn closed(point: Vec<f64>, objective: f64) -> OracleSolution {
    OracleSolution {
        point,
        objective,
        method: OracleMethod::ClosedForm,
        accuracy: 0.0,
    }
}

/// Optimum of `max f_alpha(x)` subject to the single constraint `<a, x> <= 1`.
///
/// For `alpha > 0` the constraint is tight and `x_j = a_j^(-1/alpha) / S`
/// with `S = sum_k a_k^((alpha-1)/alpha)`. At `alpha = 0` the problem is a
/// linear program; the whole budget goes to the lowest-index smallest entry.
pub fn single_constraint_packing_optimum(a: &[f64], alpha: f64) -> Result<OracleSolution> {
    check_positive(a, "constraint")?;
    check_alpha(alpha)?;
    let x: Vec<f64> = if alpha == 0.0 {
        let (best, &min) =
            a.iter().enumerate().fold(
                (0, &a[0]),
                |acc, (j, v)| if *v < *acc.1 { (j, v) } else { acc },
            );
        let mut x = vec![0.0; a.len()];
        x[best] = 1.0 / min;
        x
    } else {
        let s: f64 = a.iter().map(|v| v.powf((alpha - 1.0) / alpha)).sum();
        a.iter().map(|v| v.powf(-1.0 / alpha) / s).collect()
    };
    let objective = f_alpha_value(&x, alpha)?;
    Ok(closed(x, objective))
}

/// Optimum when constraint `j` only involves `x_j`: `x_j = 1/d_j`.
pub fn diagonal_packing_optimum(d: &[f64], alpha: f64) -> Result<OracleSolution> {
    check_positive(d, "diagonal")?;
    check_alpha(alpha)?;
    let x: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let objective = f_alpha_value(&x, alpha)?;
    Ok(closed(x, objective))
}

/// The diagonal of a square matrix whose only nonzeros lie on it.
pub fn diagonal_of(a: &SparseNonnegMatrix) -> Option<Vec<f64>> {
    if a.rows() != a.cols() || a.nnz() != a.rows() {
        return None;
    }
    (0..a.rows())
        .map(|i| {
            let v = a.get(i, i);
            (v > 0.0).then_some(v)
        })
        .collect()
}

const NEWTON_OUTER: usize = 80;
const NEWTON_INNER: usize = 200;
/// Newton decrement `lambda^2` below which a point counts as centred.
const CENTRED: f64 = 1e-6;

struct Barrier<'a> {
    a: &'a DMatrix<f64>,
    alpha: f64,
    t: f64,
}

impl Barrier<'_> {
    fn interior(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        if x.iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        let slack = DVector::from_element(self.a.nrows(), 1.0) - self.a * x;
        slack.iter().all(|s| *s > 0.0).then_some(slack)
    }

    /// `-t f_alpha(x) - sum ln(slack) - sum ln x`.
    fn value(&self, x: &DVector<f64>, slack: &DVector<f64>) -> f64 {
        let f = f_alpha_value(x.as_slice(), self.alpha).unwrap_or(f64::NAN);
        -self.t * f
            - slack.iter().map(|s| s.ln()).sum::<f64>()
            - x.iter().map(|v| v.ln()).sum::<f64>()
    }

    fn gradient_hessian(
        &self,
        x: &DVector<f64>,
        slack: &DVector<f64>,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let inv_s = slack.map(|s| 1.0 / s);
        let inv_s2 = slack.map(|s| 1.0 / (s * s));
        let mut g = self.a.transpose() * &inv_s;
        let weighted = DMatrix::from_diagonal(&inv_s2) * self.a;
        let mut h = self.a.transpose() * weighted;
        for j in 0..x.len() {
            let xj = x[j];
            g[j] += -self.t * xj.powf(-self.alpha) - 1.0 / xj;
            h[(j, j)] += self.t * self.alpha * xj.powf(-self.alpha - 1.0) + 1.0 / (xj * xj);
        }
        (g, h)
    }
}

/// Maximizes `f_alpha` over `{A x <= 1, x >= 0}` by a log-barrier
/// path-following method with damped Newton steps.
///
/// The barrier weight grows until the duality-gap bound `(m+n)/t` is at most
/// `tol * max(1, |f|)`. Intended for `m, n <= 10`.
pub fn small_dense_packing_optimum(
    a: &SparseNonnegMatrix,
    alpha: f64,
    tol: f64,
) -> Result<OracleSolution> {
    check_alpha(alpha)?;
    if !(tol >= 1e-12) {
        return Err(Error::DomainError(format!(
            "tolerance {tol} is below 1e-12"
        )));
    }
    let (m, n) = (a.rows(), a.cols());
    let dense = DMatrix::from_fn(m, n, |i, j| a.get(i, j));
    let widest = (0..m)
        .map(|i| a.row(i).map(|(_, v)| v).sum::<f64>())
        .fold(0.0, f64::max);
    let mut x = DVector::from_element(n, 0.5 / widest);
    let mut barrier = Barrier {
        a: &dense,
        alpha,
        t: 1.0,
    };
    let constraints = (m + n) as f64;

    for _ in 0..NEWTON_OUTER {
        let mut centred = false;
        let mut last_decrement = f64::INFINITY;
        for _ in 0..NEWTON_INNER {
            let slack = barrier.interior(&x).expect("iterate stays interior");
            let (g, h) = barrier.gradient_hessian(&x, &slack);
            let step = h
                .cholesky()
                .ok_or_else(|| {
                    Error::NonConvergence("barrier Hessian is not positive definite".into())
                })?
                .solve(&(-&g));
            let decrement = -g.dot(&step);
            last_decrement = decrement;
            if decrement <= CENTRED {
                centred = true;
                break;
            }
            let here = barrier.value(&x, &slack);
            // Close to the centre the value test drowns in rounding once t
            // is large, so full steps are only checked for interiority.
            let quadratic = decrement < 0.1;
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-16 {
                let cand = &x + s * &step;
                if let Some(cs) = barrier.interior(&cand) {
                    if quadratic || barrier.value(&cand, &cs) <= here - 0.25 * s * decrement {
                        x = cand;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved {
                return Err(Error::NonConvergence(format!(
                    "line search stalled at t = {:e} with Newton decrement {decrement:e}",
                    barrier.t
                )));
            }
        }
        if !centred {
            return Err(Error::NonConvergence(format!(
                "centring did not finish within {NEWTON_INNER} steps at t = {:e}",
                barrier.t
            )));
        }
        let objective = f_alpha_value(x.as_slice(), alpha)?;
        // An approximately centred point still certifies a gap of
        // `(m + n + sqrt(lambda^2 (m + n))) / t`.
        let gap = (constraints + (last_decrement.max(0.0) * constraints).sqrt()) / barrier.t;
        if gap <= tol * objective.abs().max(1.0) {
            return Ok(OracleSolution {
                point: x.iter().copied().collect(),
                objective,
                method: OracleMethod::Newton,
                accuracy: gap,
            });
        }
        barrier.t *= 8.0;
    }
    Err(Error::NonConvergence(format!(
        "barrier weight budget exhausted ({NEWTON_OUTER} increases)"
    )))
}

/// Closed-form covering optimum for a diagonal matrix (`y_i = 1/a_ii`) or a
/// single column (`y_i = mu a_i^(1/beta)` with `mu` making the constraint
/// tight).
pub fn covering_closed_form_optimum(a: &SparseNonnegMatrix, beta: f64) -> Result<OracleSolution> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidBeta(beta));
    }
    let y: Vec<f64> = if let Some(d) = diagonal_of(a) {
        d.iter().map(|v| 1.0 / v).collect()
    } else if a.cols() == 1 {
        let col: Vec<f64> = (0..a.rows()).map(|i| a.get(i, 0)).collect();
        let weights: Vec<f64> = col.iter().map(|v| v.powf(1.0 / beta)).collect();
        let mu = 1.0 / col.iter().zip(&weights).map(|(a, w)| a * w).sum::<f64>();
        weights.iter().map(|w| mu * w).collect()
    } else {
        return Err(Error::UnsupportedStructure(format!(
            "{}x{} matrix is neither diagonal nor a single column",
            a.rows(),
            a.cols()
        )));
    };
    let objective = g_beta_value(&y, beta)?;
    Ok(closed(y, objective))
}

/// The packing-side multipliers `x*` that pair with
/// [`covering_closed_form_optimum`], from stationarity `(y*)^beta = A x*`.
pub fn covering_dual_optimum(a: &SparseNonnegMatrix, beta: f64) -> Result<Vec<f64>> {
    let y = covering_closed_form_optimum(a, beta)?.point;
    if let Some(d) = diagonal_of(a) {
        Ok(d.iter().zip(&y).map(|(d, y)| y.powf(beta) / d).collect())
    } else {
        let s: f64 = (0..a.rows())
            .map(|i| a.get(i, 0).powf((1.0 + beta) / beta))
            .sum();
        Ok(vec![s.powf(-beta)])
    }
}
