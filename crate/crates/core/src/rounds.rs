//! Synchronous round-based execution with one agent per coordinate.
//!
//! Agent `j` owns `xh_j` (and `z_j` where the regime has a mirror state) and
//! a [`LocalView`] holding only column `j` of the matrix. Each round the
//! constraint side sums the loads row by row and sends every agent the loads
//! of the constraints it touches; then all agents update at once. Agents run
//! the same per-coordinate kernel as the monolithic solvers in the same
//! order, so the two produce bit-identical results.
//!
//! Every matrix read made by an agent goes through its view and is checked
//! against the agent's own column. The totals end up in a [`LocalityAudit`].

use std::cell::Cell;

use crate::covering::{
    average_update, covering_start, finish_covering, trace_row as covering_trace_row,
    CoveringSolution, CoveringState,
};
use crate::error::{Error, Result};
use crate::packing::{
    finish, mirror_point, packing_start, primal_update, row_loads_into,
    trace_row as packing_trace_row, PackingSolution, PackingState,
};
use crate::problem::{to_original, Instance, Mode, SolverConfig};
use crate::regularization::{
    coordinate_log_pressure, derive_covering_params, derive_packing_params, gradient_from_pressure,
    row_log_factor, BarrierParams, CoveringRegParams, PackingRegParams,
};

/// Global parameters every agent knows.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentParams {
    Packing(PackingRegParams),
    Covering(CoveringRegParams),
}

impl AgentParams {
    fn barrier(&self) -> BarrierParams {
        match self {
            AgentParams::Packing(p) => p.barrier(),
            AgentParams::Covering(p) => p.barrier(),
        }
    }

    /// `(beta', h, eps)` for regimes with a mirror state.
    fn mirror(&self) -> Option<(f64, f64, f64)> {
        match self {
            AgentParams::Packing(p) => Some((p.beta_prime?, p.step?, p.epsilon)),
            AgentParams::Covering(p) => Some((p.beta_prime, p.step, p.epsilon)),
        }
    }
}

/// What agent `j` may see: its own column and the global scalars.
#[derive(Debug)]
pub struct LocalView<'a> {
    coordinate: usize,
    column: Vec<(usize, usize, f64)>,
    pub m: usize,
    pub n: usize,
    pub rho: f64,
    pub params: &'a AgentParams,
    reads: Cell<u64>,
    foreign_reads: Cell<u64>,
}

impl<'a> LocalView<'a> {
    /// Copies column `j` of the instance.
    pub fn new(instance: &Instance, j: usize, params: &'a AgentParams) -> Self {
        LocalView {
            coordinate: j,
            column: instance.matrix().col(j).map(|(i, v)| (i, j, v)).collect(),
            m: instance.m(),
            n: instance.n(),
            rho: instance.rho(),
            params,
            reads: Cell::new(0),
            foreign_reads: Cell::new(0),
        }
    }

    pub fn coordinate(&self) -> usize {
        self.coordinate
    }

    /// Incident constraints and their coefficients, increasing row. Every
    /// entry handed out is logged and checked against the owning column.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.column.iter().map(move |&(i, col, v)| {
            self.reads.set(self.reads.get() + 1);
            if col != self.coordinate {
                self.foreign_reads.set(self.foreign_reads.get() + 1);
            }
            (i, v)
        })
    }

    /// Incident constraint indices, for routing. Not a matrix read.
    pub fn incident_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.column.iter().map(|e| e.0)
    }

    fn check(&self) -> Result<()> {
        match self.column.iter().find(|e| e.1 != self.coordinate) {
            Some(&(row, col, _)) if self.foreign_reads.get() > 0 => Err(Error::LocalityViolation {
                agent: self.coordinate,
                row,
                col,
            }),
            _ => Ok(()),
        }
    }
}

/// Loads delivered to one agent in one round, keyed by constraint index.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMessage {
    pub round: u64,
    /// `(i, load_i)` for the receiver's incident constraints, increasing `i`.
    pub loads: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    /// `xh_j` for packing, `x_j` for covering.
    pub x_hat: f64,
    pub z: Option<f64>,
    pub round: u64,
}

impl AgentState {
    /// Original-units value reported to the constraint side.
    fn reported(&self, params: &AgentParams) -> f64 {
        match params {
            AgentParams::Packing(p) => to_original(self.x_hat, p.alpha),
            AgentParams::Covering(_) => self.x_hat,
        }
    }

    /// Start-of-round mirror step, for regimes that have one.
    fn begin_round(self, params: &AgentParams) -> Self {
        match (params.mirror(), self.z) {
            (Some((bp, _, _)), Some(z)) => AgentState {
                x_hat: mirror_point(z, bp),
                ..self
            },
            _ => self,
        }
    }
}

/// One agent's update from its view and this round's message alone.
pub fn local_update(view: &LocalView, msg: &RoundMessage, agent: AgentState) -> Result<AgentState> {
    let bp = view.params.barrier();
    let mut pairs = Vec::with_capacity(msg.loads.len());
    let mut delivered = msg.loads.iter();
    for (i, a) in view.entries() {
        let load = match delivered.next() {
            Some(&(row, load)) if row == i => load,
            _ => {
                return Err(Error::MissingLoad {
                    round: msg.round,
                    agent: view.coordinate,
                    row: i,
                })
            }
        };
        pairs.push((a, row_log_factor(load, &bp)));
    }
    let p = coordinate_log_pressure(pairs.iter().copied(), agent.x_hat, bp.alpha);
    let t = gradient_from_pressure(p, bp.alpha).1;
    let next = match (view.params, view.params.mirror(), agent.z) {
        (_, Some((_, h, eps)), Some(z)) => AgentState {
            z: Some(z + eps * h * t),
            ..agent
        },
        (AgentParams::Packing(p), _, _) => AgentState {
            x_hat: primal_update(agent.x_hat, t, p),
            ..agent
        },
        _ => unreachable!("covering agents always carry a mirror state"),
    };
    Ok(AgentState {
        round: msg.round,
        ..next
    })
}

/// Result of checking every agent's matrix reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalityAudit {
    pub rounds: u64,
    /// Matrix entries read by all agents over all rounds.
    pub reads: u64,
    /// Reads outside the reading agent's column.
    pub out_of_column: u64,
    /// Distinct entries each agent touched, as `(row, col)`.
    pub touched: Vec<Vec<(usize, usize)>>,
}

impl LocalityAudit {
    pub fn passed(&self) -> bool {
        self.out_of_column == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributedSolution {
    Packing(PackingSolution),
    Covering(CoveringSolution),
}

/// Runs the solver selected by `mode` as lockstep rounds.
pub fn run_distributed(
    instance: &Instance,
    config: &SolverConfig,
    mode: Mode,
) -> Result<(DistributedSolution, LocalityAudit)> {
    run_distributed_observed(instance, config, mode, |_, _| {})
}

/// Like [`run_distributed`], calling `observe(round, loads)` with the loads
/// broadcast at the start of every round.
pub fn run_distributed_observed<F>(
    instance: &Instance,
    config: &SolverConfig,
    mode: Mode,
    mut observe: F,
) -> Result<(DistributedSolution, LocalityAudit)>
where
    F: FnMut(u64, &[f64]),
{
    if mode != config.mode() {
        return Err(Error::DomainError(format!(
            "engine mode {mode:?} does not match a {:?} config",
            config.mode()
        )));
    }
    let (m, n, rho) = (instance.m(), instance.n(), instance.rho());
    let eps = config.epsilon();
    let params = match mode {
        Mode::Pack => {
            AgentParams::Packing(derive_packing_params(m, n, rho, config.fairness(), eps)?)
        }
        Mode::Cover => {
            AgentParams::Covering(derive_covering_params(m, n, rho, config.fairness(), eps)?)
        }
    };
    let budget = config.max_iters.unwrap_or(match &params {
        AgentParams::Packing(p) => p.iterations,
        AgentParams::Covering(p) => p.iterations,
    });
    let stride = config.stride_for(budget);
    let views: Vec<LocalView> = (0..n)
        .map(|j| LocalView::new(instance, j, &params))
        .collect();
    let start = match &params {
        AgentParams::Packing(p) => {
            let (x_hat, z) = packing_start(n, rho, p);
            AgentState { x_hat, z, round: 0 }
        }
        AgentParams::Covering(p) => {
            let (x, z) = covering_start(m, n, rho, p);
            AgentState {
                x_hat: x,
                z: Some(z),
                round: 0,
            }
        }
    };
    let mut agents = vec![start; n];
    let mut reported = vec![0.0; n];
    let mut loads = vec![0.0; m];
    let mut y_avg = vec![0.0; m];
    let mut trace = Vec::new();
    let mut stopped_early = false;
    let covering_bp = params.barrier();

    let snapshot = |agents: &[AgentState], y_avg: &[f64], k: u64| -> Result<Snapshot> {
        let x: Vec<f64> = agents.iter().map(|a| a.x_hat).collect();
        let z: Option<Vec<f64>> = agents.iter().map(|a| a.z).collect();
        Ok(match &params {
            AgentParams::Packing(p) => {
                Snapshot::Packing(PackingState::from_parts(instance, p.clone(), x, z, k)?)
            }
            AgentParams::Covering(p) => Snapshot::Covering(CoveringState::from_parts(
                instance,
                p.clone(),
                x,
                z.expect("covering agents carry a mirror state"),
                y_avg.to_vec(),
                k,
            )),
        })
    };
    let record = |snap: &Snapshot| -> Result<crate::trace::TraceRow> {
        match snap {
            Snapshot::Packing(s) => packing_trace_row(s, instance),
            Snapshot::Covering(s) => covering_trace_row(s, instance),
        }
    };

    trace.push(record(&snapshot(&agents, &y_avg, 0)?)?);
    let early = config.early_stop && matches!(&params, AgentParams::Packing(p) if p.alpha > 1.0);
    let target = match &params {
        AgentParams::Packing(p) => 10.0 * p.epsilon * (p.alpha - 1.0),
        AgentParams::Covering(_) => 0.0,
    };

    let mut k = 0;
    while k < budget {
        k += 1;
        for a in agents.iter_mut() {
            *a = a.begin_round(&params);
        }
        for (r, a) in reported.iter_mut().zip(&agents) {
            *r = a.reported(&params);
        }
        row_loads_into(instance, &reported, &mut loads);
        if matches!(params, AgentParams::Packing(_)) {
            if let Some(row) = loads.iter().position(|&l| !(l <= 1.0)) {
                return Err(Error::FeasibilityViolation {
                    iteration: k - 1,
                    row,
                    load: loads[row],
                });
            }
        }
        observe(k, &loads);
        for (j, a) in agents.iter_mut().enumerate() {
            let msg = RoundMessage {
                round: k,
                loads: views[j].incident_rows().map(|i| (i, loads[i])).collect(),
            };
            *a = local_update(&views[j], &msg, *a)?;
        }
        if matches!(params, AgentParams::Covering(_)) {
            for (y, &l) in y_avg.iter_mut().zip(&loads) {
                *y = average_update(*y, row_log_factor(l, &covering_bp), k);
            }
        }
        if k % stride == 0 || k == budget {
            let row = record(&snapshot(&agents, &y_avg, k)?)?;
            trace.push(row);
            if early {
                if let Some(gap) = row.gap {
                    if gap <= target * row.utility.abs() {
                        stopped_early = k < budget;
                        break;
                    }
                }
            }
        }
    }

    for view in &views {
        view.check()?;
    }
    let audit = LocalityAudit {
        rounds: k,
        reads: views.iter().map(|v| v.reads.get()).sum(),
        out_of_column: views.iter().map(|v| v.foreign_reads.get()).sum(),
        touched: views
            .iter()
            .map(|v| v.column.iter().map(|e| (e.0, e.1)).collect())
            .collect(),
    };

    let solution = match snapshot(&agents, &y_avg, k)? {
        Snapshot::Packing(mut s) => {
            s.set_trace(trace);
            DistributedSolution::Packing(finish(instance, s, stopped_early)?)
        }
        Snapshot::Covering(mut s) => {
            s.set_trace(trace);
            DistributedSolution::Covering(finish_covering(instance, s, config.max_iters.is_some())?)
        }
    };
    Ok((solution, audit))
}

enum Snapshot {
    Packing(PackingState),
    Covering(CoveringState),
}
