//! The beta-fair covering solver.
//!
//! Covering runs the `alpha = 0` mirror-descent packing machinery on the
//! Lagrangian dual, with `C = 1` and the fairness beta as barrier exponent.
//! Each iterate `x` implies a covering vector `(A x)^(1/beta)`. The solver
//! averages those and finally scales the average by `1 + eps`.

use crate::error::{Error, Result};
use crate::matrix::check_len;
use crate::packing::{mirror_point, row_loads_into};
use crate::problem::{g_beta_value, Instance, Mode, SolverConfig};
use crate::regularization::{
    coordinate_log_pressure, derive_covering_params, f_r_from_loads, gradient_from_pressure,
    row_log_factor, CoveringRegParams, FrValue,
};
use crate::trace::TraceRow;

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringState {
    params: CoveringRegParams,
    x: Vec<f64>,
    z: Vec<f64>,
    y_avg: Vec<f64>,
    loads: Vec<f64>,
    factors: Vec<f64>,
    truncated: Vec<f64>,
    k: u64,
    trace: Vec<TraceRow>,
}

impl CoveringState {
    pub fn params(&self) -> &CoveringRegParams {
        &self.params
    }

    /// Packing-side iterate.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Running average of `(A x)^(1/beta)`, standardized units.
    pub fn y_avg(&self) -> &[f64] {
        &self.y_avg
    }

    /// `A x` for the current iterate.
    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn last_truncated(&self) -> &[f64] {
        &self.truncated
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn f_r(&self) -> FrValue {
        f_r_from_loads(&self.x, &self.loads, &self.params.barrier())
    }
}

fn covering_config(config: &SolverConfig) -> Result<(f64, f64)> {
    if config.mode() != Mode::Cover {
        return Err(Error::DomainError(
            "covering solver needs a covering config".to_string(),
        ));
    }
    Ok((config.fairness(), config.epsilon()))
}

/// Per-coordinate start `(x_j, z_j)` with `x_j = (1/(n rho)) (1/(m rho))^beta`
/// and the mirror state consistent with it.
pub(crate) fn covering_start(
    m: usize,
    n: usize,
    rho: f64,
    params: &CoveringRegParams,
) -> (f64, f64) {
    let x = (1.0 / (n as f64 * rho)) * (1.0 / (m as f64 * rho)).powf(params.beta);
    (x, (-params.beta_prime * x.ln()).exp_m1())
}

/// Starting state: the start point above and an empty average.
pub fn init_covering(instance: &Instance, config: &SolverConfig) -> Result<CoveringState> {
    let (beta, epsilon) = covering_config(config)?;
    let (m, n, rho) = (instance.m(), instance.n(), instance.rho());
    let params = derive_covering_params(m, n, rho, beta, epsilon)?;
    let (x, z) = covering_start(m, n, rho, &params);
    Ok(CoveringState::from_parts(
        instance,
        params,
        vec![x; n],
        vec![z; n],
        vec![0.0; m],
        0,
    ))
}

impl CoveringState {
    pub(crate) fn from_parts(
        instance: &Instance,
        params: CoveringRegParams,
        x: Vec<f64>,
        z: Vec<f64>,
        y_avg: Vec<f64>,
        k: u64,
    ) -> Self {
        let (m, n) = (instance.m(), instance.n());
        let mut state = CoveringState {
            x,
            z,
            y_avg,
            loads: vec![0.0; m],
            factors: vec![0.0; m],
            truncated: vec![0.0; n],
            k,
            trace: Vec::new(),
            params,
        };
        refresh_loads(&mut state, instance);
        state
    }

    pub(crate) fn set_trace(&mut self, trace: Vec<TraceRow>) {
        self.trace = trace;
    }
}

fn refresh_loads(state: &mut CoveringState, instance: &Instance) {
    row_loads_into(instance, &state.x, &mut state.loads);
}

/// Running-average update shared with the round engine.
#[inline]
pub(crate) fn average_update(y_avg: f64, log_factor: f64, k: u64) -> f64 {
    let k = k as f64;
    ((k - 1.0) / k) * y_avg + log_factor.exp() / k
}

/// One iteration: mirror step on `x`, gradient at the new `x`, dual
/// accumulation, and the running-average update of `y`.
pub fn step_covering(state: &mut CoveringState, instance: &Instance) -> Result<()> {
    check_len(instance.n(), state.x.len())?;
    state.k += 1;
    let bp = state.params.barrier();
    for (x, &z) in state.x.iter_mut().zip(&state.z) {
        *x = mirror_point(z, state.params.beta_prime);
    }
    refresh_loads(state, instance);
    for (r, &l) in state.factors.iter_mut().zip(&state.loads) {
        *r = row_log_factor(l, &bp);
    }
    let a = instance.matrix();
    for (j, t) in state.truncated.iter_mut().enumerate() {
        let column = a.col(j).map(|(i, v)| (v, state.factors[i]));
        let p = coordinate_log_pressure(column, state.x[j], 0.0);
        *t = gradient_from_pressure(p, 0.0).1;
    }
    let scale = state.params.epsilon * state.params.step;
    for (z, &t) in state.z.iter_mut().zip(&state.truncated) {
        *z += scale * t;
    }
    for (y, &r) in state.y_avg.iter_mut().zip(&state.factors) {
        *y = average_update(*y, r, state.k);
    }
    if let Some(j) = state.x.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::DomainError(format!(
            "covering iterate coordinate {j} is {}",
            state.x[j]
        )));
    }
    Ok(())
}

/// Column loads of a covering vector and the columns left below 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringResidual {
    pub min_load: f64,
    /// Columns with `(A^T y)_j < 1`, increasing.
    pub violated_columns: Vec<usize>,
}

pub fn covering_residual(instance: &Instance, y: &[f64]) -> Result<CoveringResidual> {
    check_len(instance.m(), y.len())?;
    if let Some((index, &value)) = y.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeCoordinate { index, value });
    }
    let loads = instance.matrix().transpose_mul_vec(y)?;
    Ok(CoveringResidual {
        min_load: loads.iter().copied().fold(f64::INFINITY, f64::min),
        violated_columns: (0..loads.len()).filter(|&j| loads[j] < 1.0).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSolution {
    /// Returned covering vector `(1 + eps) y_avg`, original units.
    pub y: Vec<f64>,
    /// The unscaled average, original units.
    pub y_avg: Vec<f64>,
    /// `g_beta(y)`.
    pub cost: f64,
    /// `g_beta(y_avg)`, the quantity the cost guarantee is stated for.
    pub cost_avg: f64,
    /// `min_j (A^T y_avg)_j`.
    pub pre_scale_residual: f64,
    /// `min_j (A^T y)_j`.
    pub min_load: f64,
    /// Final packing-side iterate, original units.
    pub x: Vec<f64>,
    pub iterations_run: u64,
    pub params: CoveringRegParams,
    pub trace: Vec<TraceRow>,
    pub warnings: Vec<String>,
}

pub(crate) fn trace_row(state: &CoveringState, instance: &Instance) -> Result<TraceRow> {
    let y = instance.scaling().to_original(&state.y_avg);
    Ok(TraceRow {
        k: state.k,
        utility: g_beta_value(&y, state.params.beta)?,
        max_load: state.loads.iter().copied().fold(0.0, f64::max),
        f_r: state.f_r(),
        gap: None,
    })
}

pub fn solve_covering(instance: &Instance, config: &SolverConfig) -> Result<CoveringSolution> {
    let mut state = init_covering(instance, config)?;
    let budget = config.max_iters.unwrap_or(state.params.iterations);
    let stride = config.stride_for(budget);
    state.trace.push(trace_row(&state, instance)?);
    while state.k < budget {
        step_covering(&mut state, instance)?;
        if state.k % stride == 0 || state.k == budget {
            let row = trace_row(&state, instance)?;
            state.trace.push(row);
        }
    }
    finish_covering(instance, state, config.max_iters.is_some())
}

pub(crate) fn finish_covering(
    instance: &Instance,
    state: CoveringState,
    overridden: bool,
) -> Result<CoveringSolution> {
    let p = &state.params;
    let mut warnings = Vec::new();
    if p.beta_was_reset {
        warnings.push(format!("beta <= 0 was replaced by {:e}", p.beta));
    }
    if p.below_floor {
        warnings.push(format!(
            "beta = {} is below the floor assumed by the cost guarantee",
            p.beta
        ));
    }
    let required = 1.0 - p.epsilon / 2.0;
    let pre = covering_residual(instance, &state.y_avg)?.min_load;
    if !(pre >= required) {
        if overridden {
            warnings.push(format!(
                "pre-scale certificate {pre} is below {required} after the overridden budget"
            ));
        } else {
            return Err(Error::CertificateShortfall {
                min_load: pre,
                required,
            });
        }
    }
    let scaling = instance.scaling();
    let y_avg = scaling.to_original(&state.y_avg);
    let y: Vec<f64> = y_avg.iter().map(|v| (1.0 + p.epsilon) * v).collect();
    // Stationarity y^beta = A x fixes how the multiplier rescales.
    let x_scale = scaling.scale.powf(-(1.0 + p.beta));
    let x = state.x.iter().map(|v| v * x_scale).collect();
    Ok(CoveringSolution {
        cost: g_beta_value(&y, p.beta)?,
        cost_avg: g_beta_value(&y_avg, p.beta)?,
        min_load: covering_residual(instance, &state.y_avg)?.min_load * (1.0 + p.epsilon),
        pre_scale_residual: pre,
        y,
        y_avg,
        x,
        iterations_run: state.k,
        params: state.params,
        trace: state.trace,
        warnings,
    })
}
