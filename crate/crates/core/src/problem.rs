//! Problem representation: standard scaled form, fairness utilities, the
//! change of variables between original and transformed coordinates, and
//! solver configuration.
//!
//! A packing instance reads the rows of `A` as constraints (`A x <= 1`); a
//! covering instance reads the columns (`A^T y >= 1`). Both are stored in
//! standard form, where the smallest nonzero entry is exactly 1 and the
//! largest equals the width `rho`.

use crate::error::{Error, Result};
use crate::matrix::{check_len, SparseNonnegMatrix};

/// A standardized constraint matrix together with its width.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    matrix: SparseNonnegMatrix,
    rho: f64,
    scaling: ScalingRecord,
}

/// Rows of the matrix are the packing constraints `A x <= 1`.
pub type PackingInstance = Instance;
/// Columns of the matrix are the covering constraints `A^T y >= 1`.
pub type CoveringInstance = Instance;

impl Instance {
    pub fn matrix(&self) -> &SparseNonnegMatrix {
        &self.matrix
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// The scale removed when this instance was standardized.
    pub fn scaling(&self) -> ScalingRecord {
        self.scaling
    }

    /// Number of constraints of the packing problem (length of `A x`).
    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of packing variables (length of `x`).
    pub fn n(&self) -> usize {
        self.matrix.cols()
    }
}

/// Records the global scale factor removed by [`standardize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRecord {
    /// The original minimum nonzero entry.
    pub scale: f64,
}

impl ScalingRecord {
    /// Maps a solution of the standardized instance back to the original
    /// one. Packing `x` and covering `y` both divide by the scale.
    pub fn to_original(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| x / self.scale).collect()
    }

    pub fn to_standard(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| x * self.scale).collect()
    }

    /// Converts a utility measured on a standardized allocation into the
    /// utility of the corresponding original allocation.
    pub fn utility_to_original(&self, value: f64, alpha: f64, n: usize) -> f64 {
        let c = self.scale;
        if alpha == 1.0 {
            value + n as f64 * (1.0 / c).ln()
        } else {
            c.powf(alpha - 1.0) * value
        }
    }
}

/// Divides `raw` by its minimum nonzero entry.
///
/// The matrix type already guarantees nonnegative finite entries and no
/// empty rows or columns, so this cannot fail. Use
/// [`standardize_triplets`] to validate a raw entry list in one step.
pub fn standardize(raw: &SparseNonnegMatrix) -> (Instance, ScalingRecord) {
    let scale = raw.min_entry();
    let matrix = if scale == 1.0 {
        raw.clone()
    } else {
        raw.divided_by(scale)
    };
    let rho = matrix.max_entry();
    let scaling = ScalingRecord { scale };
    (
        Instance {
            matrix,
            rho,
            scaling,
        },
        scaling,
    )
}

/// Validates a 0-based entry list and standardizes it.
pub fn standardize_triplets<I>(m: usize, n: usize, entries: I) -> Result<(Instance, ScalingRecord)>
where
    I: IntoIterator<Item = (usize, usize, f64)>,
{
    let raw = SparseNonnegMatrix::from_triplets(m, n, entries)?;
    Ok(standardize(&raw))
}

/// Value of the alpha-fair utility `sum x^(1-alpha)/(1-alpha)`, or
/// `sum ln x` at `alpha = 1`.
pub fn f_alpha_value(x: &[f64], alpha: f64) -> Result<f64> {
    for (index, &value) in x.iter().enumerate() {
        if value < 0.0 || value.is_nan() {
            return Err(Error::NegativeCoordinate { index, value });
        }
        if alpha >= 1.0 && value == 0.0 {
            return Err(Error::NonPositiveCoordinate { index, value });
        }
    }
    Ok(if alpha == 1.0 {
        x.iter().map(|v| v.ln()).sum()
    } else {
        let p = 1.0 - alpha;
        x.iter().map(|v| v.powf(p)).sum::<f64>() / p
    })
}

/// Value of the beta-fair cost `sum y^(1+beta)/(1+beta)`.
pub fn g_beta_value(y: &[f64], beta: f64) -> Result<f64> {
    for (index, &value) in y.iter().enumerate() {
        if value < 0.0 || value.is_nan() {
            return Err(Error::NegativeCoordinate { index, value });
        }
    }
    let p = 1.0 + beta;
    Ok(y.iter().map(|v| v.powf(p)).sum::<f64>() / p)
}

/// `F_alpha` for one coordinate: `xh^(1/(1-alpha))`, or `exp(xh)` at
/// `alpha = 1`. No domain checks.
#[inline]
pub fn to_original(xh: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        xh.exp()
    } else {
        xh.powf(1.0 / (1.0 - alpha))
    }
}

/// Inverse of [`to_original`]: `x^(1-alpha)`, or `ln x` at `alpha = 1`.
#[inline]
pub fn to_transformed(x: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        x.ln()
    } else {
        x.powf(1.0 - alpha)
    }
}

/// Maps a transformed vector to original coordinates.
pub fn transform(x_hat: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if alpha != 1.0 {
        if let Some((i, &v)) = x_hat.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::DomainError(format!(
                "transformed coordinate {i} is {v}; must be positive for alpha != 1"
            )));
        }
    }
    Ok(x_hat.iter().map(|&v| to_original(v, alpha)).collect())
}

/// Maps an original allocation to transformed coordinates.
pub fn transform_inverse(x: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if let Some((i, &v)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::DomainError(format!(
            "coordinate {i} is {v}; must be positive"
        )));
    }
    Ok(x.iter().map(|&v| to_transformed(v, alpha)).collect())
}

/// `A x` for a nonnegative allocation.
pub fn constraint_loads(instance: &Instance, x: &[f64]) -> Result<Vec<f64>> {
    check_len(instance.n(), x.len())?;
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeCoordinate { index, value });
    }
    instance.matrix.mul_vec(x)
}

/// Lower and upper bounds on the optimal transformed objective of a
/// standardized packing instance.
///
/// For `alpha != 1` these are `n/(1-alpha) * (n rho)^(alpha-1)` and
/// `n/(1-alpha)`; at `alpha = 1` they are `-n ln(n rho)` and `0`. The
/// transformed optimum equals the utility of the optimal allocation.
pub fn optimum_bounds(instance: &Instance, alpha: f64) -> (f64, f64) {
    let n = instance.n() as f64;
    let width = n * instance.rho;
    if alpha == 1.0 {
        (-n * width.ln(), 0.0)
    } else {
        let top = n / (1.0 - alpha);
        (top * width.powf(alpha - 1.0), top)
    }
}

/// Bounds on the optimal covering cost `g_beta(y*)` of a standardized
/// instance: `(1/(m rho))^(1+beta) m/(1+beta)` and `m/(1+beta)`.
pub fn covering_optimum_bounds(instance: &Instance, beta: f64) -> (f64, f64) {
    let m = instance.m() as f64;
    let upper = m / (1.0 + beta);
    let lower = (1.0 / (m * instance.rho)).powf(1.0 + beta) * upper;
    (lower, upper)
}

/// Which problem a config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Pack,
    Cover,
}

/// Validated solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    mode: Mode,
    fairness: f64,
    epsilon: f64,
    /// Overrides the derived iteration budget.
    pub max_iters: Option<u64>,
    /// Stop early once the duality gap certifies the target (packing with
    /// alpha > 1 only).
    pub early_stop: bool,
    /// Record a trace row every this many iterations. Defaults to
    /// `max(1, K/1000)`.
    pub trace_stride: Option<u64>,
}

/// Largest admissible epsilon for packing with the given alpha:
/// `min(1/2, 1/(10|alpha-1|))`, which is `1/2` at `alpha = 1`.
pub fn packing_epsilon_bound(alpha: f64) -> f64 {
    if alpha == 1.0 {
        0.5
    } else {
        (1.0 / (10.0 * (alpha - 1.0).abs())).min(0.5)
    }
}

pub(crate) fn validate_packing(alpha: f64, epsilon: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let bound = packing_epsilon_bound(alpha);
    if !(epsilon > 0.0 && epsilon <= bound) {
        let reason = if bound < 0.5 {
            format!("alpha = {alpha} requires epsilon <= 1/(10(alpha-1)) = {bound}")
        } else {
            "epsilon must lie in (0, 1/2]".to_string()
        };
        return Err(Error::EpsilonOutOfRange {
            epsilon,
            bound,
            reason,
        });
    }
    Ok(())
}

pub(crate) fn validate_covering(beta: f64, epsilon: f64) -> Result<()> {
    if !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::EpsilonOutOfRange {
            epsilon,
            bound: 0.5,
            reason: "epsilon must lie in (0, 1/2]".to_string(),
        });
    }
    Ok(())
}

impl SolverConfig {
    pub fn packing(alpha: f64, epsilon: f64) -> Result<Self> {
        validate_packing(alpha, epsilon)?;
        Ok(Self {
            mode: Mode::Pack,
            fairness: alpha,
            epsilon,
            max_iters: None,
            early_stop: false,
            trace_stride: None,
        })
    }

    /// Any finite beta is accepted; `beta <= 0` is later reset to the
    /// near-linear default.
    pub fn covering(beta: f64, epsilon: f64) -> Result<Self> {
        validate_covering(beta, epsilon)?;
        Ok(Self {
            mode: Mode::Cover,
            fairness: beta,
            epsilon,
            max_iters: None,
            early_stop: false,
            trace_stride: None,
        })
    }

    pub fn with_max_iters(mut self, k: u64) -> Self {
        self.max_iters = Some(k);
        self
    }

    pub fn with_early_stop(mut self, on: bool) -> Self {
        self.early_stop = on;
        self
    }

    pub fn with_trace_stride(mut self, stride: u64) -> Self {
        self.trace_stride = Some(stride.max(1));
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Alpha for packing configs, beta for covering configs.
    pub fn fairness(&self) -> f64 {
        self.fairness
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub(crate) fn stride_for(&self, k: u64) -> u64 {
        self.trace_stride.unwrap_or((k / 1000).max(1)).max(1)
    }
}
