//! The alpha-fair packing solver.
//!
//! The solver works on the transformed iterate `xh` and keeps the original
//! allocation `u = F_alpha(xh)` and its loads `A u` cached. Every step
//! recomputes the loads once and checks them against 1, so a
//! [`Error::FeasibilityViolation`] means an implementation bug, never a
//! property of the input.
//!
//! One step, by regime:
//!
//! ```text
//! alpha < 1:  xh <- (1 + z)^(-1/beta'),   z <- z + eps h t(xh)
//! alpha = 1:  xh <- xh - beta/(4(1+beta)) t(xh)
//! alpha > 1:  xh <- (1 - beta(1-alpha)/(4(1+alpha beta)) t(xh)) xh
//! ```
//!
//! where `t` is the truncated gradient of `f_r`.

use crate::error::{Error, Result};
use crate::matrix::check_len;
use crate::problem::{f_alpha_value, to_original, to_transformed, Instance, Mode, SolverConfig};
use crate::regularization::{
    check_domain, coordinate_log_pressure, derive_packing_params, f_r_from_loads,
    gradient_from_pressure, row_log_factor, BarrierParams, FrValue, PackingRegParams,
};
use crate::trace::TraceRow;

/// Solver state for one packing run.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingState {
    params: PackingRegParams,
    x_hat: Vec<f64>,
    z: Option<Vec<f64>>,
    u: Vec<f64>,
    loads: Vec<f64>,
    factors: Vec<f64>,
    truncated: Vec<f64>,
    k: u64,
    trace: Vec<TraceRow>,
}

impl PackingState {
    pub fn params(&self) -> &PackingRegParams {
        &self.params
    }

    /// Transformed iterate.
    pub fn x_hat(&self) -> &[f64] {
        &self.x_hat
    }

    /// Mirror state, present only for `alpha < 1`.
    pub fn z(&self) -> Option<&[f64]> {
        self.z.as_deref()
    }

    /// Cached `F_alpha(xh)` in standardized units.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Cached `A u`.
    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    /// Truncated gradient used by the most recent step.
    pub fn last_truncated(&self) -> &[f64] {
        &self.truncated
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn max_load(&self) -> f64 {
        self.loads.iter().copied().fold(0.0, f64::max)
    }

    /// `f_r` at the current iterate, from the cached loads.
    pub fn f_r(&self) -> FrValue {
        f_r_from_loads(&self.x_hat, &self.loads, &self.params.barrier())
    }

    /// `f_alpha(u)` in standardized units.
    pub fn utility(&self) -> f64 {
        f_alpha_value(&self.u, self.params.alpha).unwrap_or(f64::NAN)
    }
}

fn packing_config(config: &SolverConfig) -> Result<(f64, f64)> {
    if config.mode() != Mode::Pack {
        return Err(Error::DomainError(
            "packing solver needs a packing config".to_string(),
        ));
    }
    Ok((config.fairness(), config.epsilon()))
}

/// Per-coordinate start `(xh_j, z_j)`: `u = (1-eps)/(n rho)` in original
/// units, with the mirror state chosen so that the first mirror step
/// reproduces it.
pub(crate) fn packing_start(n: usize, rho: f64, params: &PackingRegParams) -> (f64, Option<f64>) {
    let start = (1.0 - params.epsilon) / (n as f64 * rho);
    let x_hat = to_transformed(start, params.alpha);
    let z = params.beta_prime.map(|bp| (-bp * x_hat.ln()).exp_m1());
    (x_hat, z)
}

/// Starting state of the packing solver.
pub fn init_packing(instance: &Instance, config: &SolverConfig) -> Result<PackingState> {
    let (alpha, epsilon) = packing_config(config)?;
    let params = derive_packing_params(instance.m(), instance.n(), instance.rho(), alpha, epsilon)?;
    let n = instance.n();
    let (x_hat, z) = packing_start(n, instance.rho(), &params);
    PackingState::from_parts(instance, params, vec![x_hat; n], z.map(|z| vec![z; n]), 0)
}

impl PackingState {
    /// Rebuilds a state from its coordinates, recomputing the cached
    /// allocation and loads.
    pub(crate) fn from_parts(
        instance: &Instance,
        params: PackingRegParams,
        x_hat: Vec<f64>,
        z: Option<Vec<f64>>,
        k: u64,
    ) -> Result<Self> {
        let (m, n) = (instance.m(), instance.n());
        let mut state = PackingState {
            x_hat,
            z,
            u: vec![0.0; n],
            loads: vec![0.0; m],
            factors: vec![0.0; m],
            truncated: vec![0.0; n],
            k,
            trace: Vec::new(),
            params,
        };
        refresh_loads(&mut state, instance)?;
        Ok(state)
    }

    pub(crate) fn push_trace(&mut self, row: TraceRow) {
        self.trace.push(row);
    }

    pub(crate) fn set_trace(&mut self, trace: Vec<TraceRow>) {
        self.trace = trace;
    }
}

fn refresh_loads(state: &mut PackingState, instance: &Instance) -> Result<()> {
    let alpha = state.params.alpha;
    for (u, &xh) in state.u.iter_mut().zip(&state.x_hat) {
        *u = to_original(xh, alpha);
    }
    row_loads_into(instance, &state.u, &mut state.loads);
    match state.loads.iter().position(|&l| !(l <= 1.0)) {
        Some(row) => Err(Error::FeasibilityViolation {
            iteration: state.k,
            row,
            load: state.loads[row],
        }),
        None => Ok(()),
    }
}

/// `A u` with each row summed in increasing column order. The round engine
/// computes its broadcast loads with this same function.
pub(crate) fn row_loads_into(instance: &Instance, u: &[f64], loads: &mut [f64]) {
    let a = instance.matrix();
    for (i, load) in loads.iter_mut().enumerate() {
        *load = a.row(i).map(|(j, v)| v * u[j]).sum();
    }
}

fn refresh_truncated(state: &mut PackingState, instance: &Instance) {
    let bp = state.params.barrier();
    for (r, &l) in state.factors.iter_mut().zip(&state.loads) {
        *r = row_log_factor(l, &bp);
    }
    let a = instance.matrix();
    for (j, t) in state.truncated.iter_mut().enumerate() {
        let column = a.col(j).map(|(i, v)| (v, state.factors[i]));
        let p = coordinate_log_pressure(column, state.x_hat[j], bp.alpha);
        *t = gradient_from_pressure(p, bp.alpha).1;
    }
}

/// `(1 + z)^(-1/beta')`, the mirror map shared with the round engine.
#[inline]
pub(crate) fn mirror_point(z: f64, beta_prime: f64) -> f64 {
    (-z.ln_1p() / beta_prime).exp()
}

/// Primal update of one coordinate for `alpha >= 1`.
#[inline]
pub(crate) fn primal_update(x_hat: f64, t: f64, params: &PackingRegParams) -> f64 {
    if params.alpha == 1.0 {
        x_hat - params.additive_step() * t
    } else {
        (1.0 - params.multiplicative_step() * t) * x_hat
    }
}

/// Advances the state by one iteration.
pub fn step(state: &mut PackingState, instance: &Instance) -> Result<()> {
    check_len(instance.n(), state.x_hat.len())?;
    state.k += 1;
    match (state.params.beta_prime, state.params.step) {
        (Some(bp), Some(h)) => {
            let z = state
                .z
                .as_ref()
                .expect("mirror state present for alpha < 1");
            for (xh, &zj) in state.x_hat.iter_mut().zip(z) {
                *xh = mirror_point(zj, bp);
            }
            refresh_loads(state, instance)?;
            refresh_truncated(state, instance);
            let scale = state.params.epsilon * h;
            let z = state
                .z
                .as_mut()
                .expect("mirror state present for alpha < 1");
            for (zj, &t) in z.iter_mut().zip(&state.truncated) {
                *zj += scale * t;
            }
        }
        _ => {
            refresh_truncated(state, instance);
            for (xh, &t) in state.x_hat.iter_mut().zip(&state.truncated) {
                *xh = primal_update(*xh, t, &state.params);
            }
            refresh_loads(state, instance)?;
        }
    }
    check_domain(&state.x_hat, state.params.alpha)
}

/// Loads of an allocation and the constraints it violates.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub max_load: f64,
    /// Rows with load strictly above 1, increasing.
    pub violated_rows: Vec<usize>,
    pub is_feasible: bool,
}

/// Exact loads of `x`; feasible means every load is at most 1, no slack.
pub fn feasibility_report(instance: &Instance, x: &[f64]) -> Result<FeasibilityReport> {
    let loads = crate::problem::constraint_loads(instance, x)?;
    let violated_rows: Vec<usize> = (0..loads.len()).filter(|&i| loads[i] > 1.0).collect();
    Ok(FeasibilityReport {
        max_load: loads.iter().copied().fold(0.0, f64::max),
        is_feasible: violated_rows.is_empty(),
        violated_rows,
    })
}

/// Dual certificate `y_i = C (A F_alpha(xh))_i^(1/beta)`, zero on idle rows.
pub fn dual_certificate(
    instance: &Instance,
    bp: &BarrierParams,
    x_hat: &[f64],
) -> Result<Vec<f64>> {
    let loads = crate::regularization::transformed_loads(instance, x_hat, bp.alpha)?;
    Ok(loads.iter().map(|&l| row_log_factor(l, bp).exp()).collect())
}

/// `<1, y> / <y, loads>` for `y_i = exp(r_i)`, shifted by the largest `r_i`
/// so the ratio stays defined when every `y_i` underflows.
fn slackness_ratio(loads: &[f64], bp: &BarrierParams) -> f64 {
    let r: Vec<f64> = loads.iter().map(|&l| row_log_factor(l, bp)).collect();
    let peak = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NAN;
    }
    let (mut total, mut weighted) = (0.0, 0.0);
    for (&ri, &l) in r.iter().zip(loads) {
        let w = (ri - peak).exp();
        total += w;
        weighted += w * l;
    }
    total / weighted
}

/// Lagrangian dual value `-<1, y> + alpha/(alpha-1) sum_j (A^T y)_j^((alpha-1)/alpha)`
/// for `alpha > 1`. It lower-bounds `-f_alpha` at every feasible point.
pub fn lagrangian_dual_value(instance: &Instance, y: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::DomainError(format!(
            "the Lagrangian dual is only used for alpha > 1, got {alpha}"
        )));
    }
    if let Some(i) = y.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::DualDomainError(i));
    }
    let aty = instance.matrix().transpose_mul_vec(y)?;
    let power = (alpha - 1.0) / alpha;
    let total: f64 = y.iter().sum();
    Ok(-total + alpha / (alpha - 1.0) * aty.iter().map(|v| v.powf(power)).sum::<f64>())
}

/// Duality-gap estimate `-f_alpha(F_alpha(xh)) - g(y)` with `y` the dual
/// certificate of `xh`. Only defined for `alpha > 1`; nonnegative up to
/// rounding whenever `xh` is feasible.
pub fn packing_duality_gap(instance: &Instance, x_hat: &[f64], bp: &BarrierParams) -> Result<f64> {
    let y = dual_certificate(instance, bp, x_hat)?;
    let dual = lagrangian_dual_value(instance, &y, bp.alpha)?;
    let primal = x_hat.iter().sum::<f64>() / (bp.alpha - 1.0);
    Ok(primal - dual)
}

/// How the reported guarantee bound was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuaranteeForm {
    /// `3 eps (1-alpha) f`, with the returned utility standing in for `f*`.
    BelowOne,
    /// `3 eps n`.
    Proportional,
    /// `10 eps (alpha-1) |f|`, with the returned utility standing in for `f*`.
    AboveOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingSolution {
    /// Allocation in original units.
    pub x: Vec<f64>,
    /// `f_alpha(x)` in original units.
    pub utility: f64,
    /// Error scale `eps n` or `eps (1-alpha) f`, the latter evaluated at the
    /// returned utility.
    pub eps_f: f64,
    /// Bound on `f* - utility` the run is expected to meet, evaluated at the
    /// returned utility.
    pub guarantee_bound: f64,
    pub guarantee_form: GuaranteeForm,
    pub iterations_run: u64,
    /// `max_i (A x)_i` in original units.
    pub max_load: f64,
    /// Dual certificate in original units (`alpha > 1`).
    pub dual: Option<Vec<f64>>,
    /// Duality-gap estimate in original units (`alpha > 1`).
    pub gap: Option<f64>,
    /// `<1, y> / <y, A x>` for `alpha > 1`; approximate complementary
    /// slackness asks for at most `1 + eps` once past the burn-in.
    pub slackness: Option<f64>,
    pub stopped_early: bool,
    pub params: PackingRegParams,
    pub trace: Vec<TraceRow>,
    pub warnings: Vec<String>,
}

pub(crate) fn trace_row(state: &PackingState, instance: &Instance) -> Result<TraceRow> {
    let alpha = state.params.alpha;
    let scaling = instance.scaling();
    let gap = if alpha > 1.0 {
        Some(packing_duality_gap(
            instance,
            &state.x_hat,
            &state.params.barrier(),
        )?)
    } else {
        None
    };
    let c_pow = scaling.scale.powf(alpha - 1.0);
    Ok(TraceRow {
        k: state.k,
        utility: scaling.utility_to_original(state.utility(), alpha, instance.n()),
        max_load: state.max_load(),
        f_r: state.f_r(),
        gap: gap.map(|g| g * c_pow),
    })
}

/// Runs the packing solver for its full iteration budget (or the configured
/// override) and maps the result back to original units.
pub fn solve_packing(instance: &Instance, config: &SolverConfig) -> Result<PackingSolution> {
    let mut state = init_packing(instance, config)?;
    let budget = config.max_iters.unwrap_or(state.params.iterations);
    let stride = config.stride_for(budget);
    let alpha = state.params.alpha;
    let early = config.early_stop && alpha > 1.0;
    let target = 10.0 * state.params.epsilon * (alpha - 1.0);

    let row = trace_row(&state, instance)?;
    state.push_trace(row);
    let mut stopped_early = false;
    while state.k < budget {
        step(&mut state, instance)?;
        if state.k % stride == 0 || state.k == budget {
            let row = trace_row(&state, instance)?;
            state.trace.push(row);
            if early {
                if let Some(gap) = row.gap {
                    if gap <= target * row.utility.abs() {
                        stopped_early = state.k < budget;
                        break;
                    }
                }
            }
        }
    }
    finish(instance, state, stopped_early)
}

pub(crate) fn finish(
    instance: &Instance,
    state: PackingState,
    stopped_early: bool,
) -> Result<PackingSolution> {
    let alpha = state.params.alpha;
    let epsilon = state.params.epsilon;
    let scaling = instance.scaling();
    let x = scaling.to_original(&state.u);
    let utility = scaling.utility_to_original(state.utility(), alpha, instance.n());
    let n = instance.n() as f64;
    let (eps_f, guarantee_bound, guarantee_form) = if alpha < 1.0 {
        let e = epsilon * (1.0 - alpha) * utility;
        (e, 3.0 * e, GuaranteeForm::BelowOne)
    } else if alpha == 1.0 {
        (epsilon * n, 3.0 * epsilon * n, GuaranteeForm::Proportional)
    } else {
        let e = epsilon * (1.0 - alpha) * utility;
        (e, 10.0 * e, GuaranteeForm::AboveOne)
    };
    let mut warnings = Vec::new();
    let (dual, gap, slackness) = if alpha > 1.0 {
        let bp = state.params.barrier();
        let c_pow = scaling.scale.powf(alpha - 1.0);
        let y = dual_certificate(instance, &bp, &state.x_hat)?;
        let gap = packing_duality_gap(instance, &state.x_hat, &bp)?;
        let ratio = slackness_ratio(&state.loads, &bp);
        let burn_in = (10.0 / state.params.beta).ceil();
        if state.k as f64 >= burn_in && !(ratio <= 1.0 + epsilon) {
            warnings.push(format!(
                "complementary slackness ratio {ratio} exceeds 1 + eps after {} iterations",
                state.k
            ));
        }
        (
            Some(y.iter().map(|v| v * c_pow).collect()),
            Some(gap * c_pow),
            Some(ratio),
        )
    } else {
        (None, None, None)
    };
    let report = feasibility_report(instance, &state.u)?;
    if !report.is_feasible {
        return Err(Error::FeasibilityViolation {
            iteration: state.k,
            row: report.violated_rows[0],
            load: report.max_load,
        });
    }
    Ok(PackingSolution {
        x,
        utility,
        eps_f,
        guarantee_bound,
        guarantee_form,
        iterations_run: state.k,
        max_load: report.max_load,
        dual,
        gap,
        slackness,
        stopped_early,
        params: state.params,
        trace: state.trace,
        warnings,
    })
}
