//! Linearly implicit time stepping of `rho_t + P(rho) rho = F(rho)`.
//!
//! Each step freezes the operators at the current height and solves
//! `(I + dt P) rho_next = rho + dt (F - R0)`, where `R0` is the constant part of
//! the remainder. Step size is controlled by step doubling.

use serde::Serialize;

use crate::curvature::{CurvatureBundle, HeightField};
use crate::energy::{energy_report, EnergyReport};
use crate::error::{Error, Result};
use crate::grid::GridAtlas;
use crate::krylov::{gmres, GmresOptions, LuPattern, LuPreconditioner};
use crate::operator::OperatorSplit;
use crate::sparse::SparseOperator;

/// Relative slack allowed on the per-step energy decrease.
pub const ENERGY_SLACK: f64 = 1e-8;
/// Refactor the preconditioner once GMRES needs more iterations than this.
const REFACTOR_ITERATIONS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowParams {
    pub dt0: f64,
    pub t_end: f64,
    pub atol: f64,
    pub rtol: f64,
    pub adaptive: bool,
    /// Keep a trajectory sample every this many accepted steps (0 keeps only the ends).
    pub output_every: usize,
    /// Fixed equilibrium threshold; `None` uses `1e-8 (1 + |H|^3)`.
    pub equilibrium_tol: Option<f64>,
    pub dt_min: f64,
    pub max_steps: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            dt0: 1e-4,
            t_end: 1.0,
            atol: 1e-8,
            rtol: 1e-6,
            adaptive: true,
            output_every: 1,
            equilibrium_tol: None,
            dt_min: 1e-12,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowEventKind {
    ReachedTEnd,
    Equilibrium,
    TubularExit,
    DegenerateMetric,
    SolverFailure,
    DtUnderflow,
}

impl FlowEventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowEventKind::ReachedTEnd => "reached_t_end",
            FlowEventKind::Equilibrium => "equilibrium",
            FlowEventKind::TubularExit => "tubular_exit",
            FlowEventKind::DegenerateMetric => "degenerate_metric",
            FlowEventKind::SolverFailure => "solver_failure",
            FlowEventKind::DtUnderflow => "dt_underflow",
        }
    }

    fn from_error(e: &Error) -> Option<Self> {
        match e {
            Error::TubularExit { .. } | Error::NearSingular { .. } => Some(Self::TubularExit),
            Error::DegenerateMetric { .. } | Error::SlopeBlowup { .. } | Error::EllipticityLoss(_) => {
                Some(Self::DegenerateMetric)
            }
            Error::SolverFailure { .. } | Error::Factorization(_) => Some(Self::SolverFailure),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowEvent {
    pub kind: FlowEventKind,
    pub t: f64,
    pub message: String,
}

/// Height and every derived quantity at one time.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub dt: f64,
    pub height: HeightField,
    pub bundle: CurvatureBundle,
    pub split: OperatorSplit,
    pub report: EnergyReport,
}

impl FlowState {
    /// Evaluate the operators at `rho`; fails when `rho` is inadmissible.
    pub fn new(atlas: &GridAtlas, t: f64, dt: f64, rho: &[f64]) -> Result<Self> {
        let limit = atlas.surface.tubular_a;
        let sup = rho.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(sup < limit) {
            return Err(Error::TubularExit { sup, limit });
        }
        let height = HeightField::discrete(atlas, rho)?;
        let bundle = CurvatureBundle::build(atlas, &height)?;
        let split = OperatorSplit::build(atlas, &bundle, &height)?;
        let report = energy_report(atlas, &bundle, t, sup, split.el_residual_sup(atlas));
        Ok(Self { t, dt, height, bundle, split, report })
    }

    pub fn rho(&self) -> &[f64] {
        self.height.values()
    }

    /// `rho_t = -G` at this state.
    pub fn rho_t(&self) -> Vec<f64> {
        self.split.rhs_direct.iter().map(|g| -g).collect()
    }

    pub fn default_equilibrium_tol(&self) -> f64 {
        let h = self.bundle.nodes.iter().fold(0.0f64, |m, n| m.max(n.mean.abs()));
        1e-8 * (1.0 + h * h * h)
    }

    /// Blended sup of the direct right-hand side against `tol`.
    pub fn is_equilibrium(&self, atlas: &GridAtlas, tol: f64) -> bool {
        atlas.blended_sup(&self.split.rhs_direct) <= tol
    }
}

pub fn detect_equilibrium(atlas: &GridAtlas, state: &FlowState, tol: Option<f64>) -> bool {
    state.is_equilibrium(atlas, tol.unwrap_or_else(|| state.default_equilibrium_tol()))
}

/// Step-size controller for a first-order method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller {
    pub atol: f64,
    pub rtol: f64,
    pub safety: f64,
    pub min_factor: f64,
    pub max_factor: f64,
}

impl Controller {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol, safety: 0.9, min_factor: 0.2, max_factor: 2.0 }
    }

    pub fn tolerance(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepDecision {
    Accept { dt_next: f64 },
    Reject { dt_next: f64 },
}

/// `dt * clip(0.9 (tol / err)^(1/2), 0.2, 2)`; accept when `err <= tol`.
pub fn adapt_dt(ctrl: &Controller, err: f64, tol: f64, dt: f64) -> StepDecision {
    let factor = if err == 0.0 {
        ctrl.max_factor
    } else {
        (ctrl.safety * (tol / err).sqrt()).clamp(ctrl.min_factor, ctrl.max_factor)
    };
    let dt_next = dt * factor;
    if err <= tol {
        StepDecision::Accept { dt_next }
    } else {
        StepDecision::Reject { dt_next }
    }
}

/// Linear solver state carried across steps.
pub struct StepSolver {
    pattern: Option<LuPattern>,
    preconditioner: Option<(LuPreconditioner, f64)>,
    pub options: GmresOptions,
    pub last_iterations: usize,
    pub factorizations: usize,
}

impl std::fmt::Debug for StepSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StepSolver")
            .field("last_iterations", &self.last_iterations)
            .field("factorizations", &self.factorizations)
            .finish_non_exhaustive()
    }
}

impl Default for StepSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl StepSolver {
    pub fn new() -> Self {
        Self { pattern: None, preconditioner: None, options: GmresOptions::default(), last_iterations: 0, factorizations: 0 }
    }

    fn needs_refactor(&self, dt: f64) -> bool {
        match &self.preconditioner {
            None => true,
            Some((_, dt_ref)) => dt > 2.0 * dt_ref || dt < 0.25 * dt_ref || self.last_iterations > REFACTOR_ITERATIONS,
        }
    }

    /// Solve `(I + dt P) x = rhs` with the operators of `split`.
    pub fn solve(&mut self, atlas: &GridAtlas, split: &OperatorSplit, dt: f64, rhs: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let ones = vec![1.0; n];
        let system: SparseOperator = split.stiff.scaled_plus_diagonal(dt, &ones);
        if self.needs_refactor(dt) {
            let low = split.low_order_stiff(atlas)?.scaled_plus_diagonal(dt, &ones);
            let pc = LuPreconditioner::factor(&low, &mut self.pattern)?;
            self.preconditioner = Some((pc, dt));
            self.factorizations += 1;
        }
        let (pc, _) = self.preconditioner.as_ref().expect("preconditioner built above");
        match gmres(&system, rhs, Some(guess), pc, self.options) {
            Ok((x, out)) => {
                self.last_iterations = out.iterations;
                Ok(x)
            }
            Err(e) => {
                // a stale factorization is the usual culprit; retry once with a fresh one
                self.preconditioner = None;
                self.last_iterations = 0;
                let low = split.low_order_stiff(atlas)?.scaled_plus_diagonal(dt, &ones);
                let pc = LuPreconditioner::factor(&low, &mut self.pattern)?;
                self.factorizations += 1;
                let result = gmres(&system, rhs, Some(guess), &pc, self.options);
                self.preconditioner = Some((pc, dt));
                match result {
                    Ok((x, out)) => {
                        self.last_iterations = out.iterations;
                        Ok(x)
                    }
                    Err(_) => Err(e),
                }
            }
        }
    }
}

/// One linearly implicit Euler step of size `dt` from `state`.
pub fn implicit_euler(atlas: &GridAtlas, state: &FlowState, dt: f64, solver: &mut StepSolver) -> Result<Vec<f64>> {
    let rho = state.rho();
    let split = &state.split;
    let rhs: Vec<f64> = rho
        .iter()
        .zip(&split.forcing)
        .zip(&split.remainder_constant)
        .map(|((r, f), c)| r + dt * (f - c))
        .collect();
    solver.solve(atlas, split, dt, &rhs, rho)
}

/// Advance `state` by its own `dt` without error control.
pub fn step_semi_implicit(atlas: &GridAtlas, state: &FlowState, solver: &mut StepSolver) -> Result<FlowState> {
    let next = implicit_euler(atlas, state, state.dt, solver)?;
    FlowState::new(atlas, state.t + state.dt, state.dt, &next)
}

/// A stored point of the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub rho: Vec<f64>,
    pub rho_t: Vec<f64>,
}

/// Per accepted step, what the time-series sink receives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub dt: f64,
    pub report: EnergyReport,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub records: Vec<StepRecord>,
    pub event: FlowEvent,
    pub steps: usize,
    pub rejected: usize,
    /// Accepted steps whose energy rose by more than the slack.
    pub energy_violations: Vec<usize>,
    pub final_state: Option<FlowState>,
}

impl Trajectory {
    pub fn initial_report(&self) -> Option<&EnergyReport> {
        self.records.first().map(|r| &r.report)
    }

    pub fn final_report(&self) -> Option<&EnergyReport> {
        self.records.last().map(|r| &r.report)
    }

    pub fn is_energy_monotone(&self) -> bool {
        self.energy_violations.is_empty()
    }
}

fn sample_of(state: &FlowState) -> Sample {
    Sample { t: state.t, rho: state.rho().to_vec(), rho_t: state.rho_t() }
}

pub fn run(atlas: &GridAtlas, rho0: &[f64], params: &FlowParams) -> Trajectory {
    run_with_sink(atlas, rho0, params, &mut |_, _| Ok(())).expect("no-op sink cannot fail")
}

/// Run the flow, calling `sink` after every accepted state (including the initial one).
pub fn run_with_sink(
    atlas: &GridAtlas,
    rho0: &[f64],
    params: &FlowParams,
    sink: &mut dyn FnMut(&FlowState, &StepRecord) -> Result<()>,
) -> Result<Trajectory> {
    let mut traj = Trajectory {
        samples: Vec::new(),
        records: Vec::new(),
        event: FlowEvent { kind: FlowEventKind::ReachedTEnd, t: 0.0, message: String::new() },
        steps: 0,
        rejected: 0,
        energy_violations: Vec::new(),
        final_state: None,
    };
    let finish = |traj: &mut Trajectory, kind: FlowEventKind, t: f64, message: String| {
        traj.event = FlowEvent { kind, t, message };
    };
    let classify = |e: Error| -> Result<(FlowEventKind, String)> {
        match FlowEventKind::from_error(&e) {
            Some(kind) => Ok((kind, e.to_string())),
            None => Err(e),
        }
    };

    let mut state = match FlowState::new(atlas, 0.0, params.dt0, rho0) {
        Ok(s) => s,
        Err(e) => {
            let (kind, msg) = classify(e)?;
            finish(&mut traj, kind, 0.0, msg);
            return Ok(traj);
        }
    };
    let record = StepRecord { step: 0, dt: 0.0, report: state.report };
    sink(&state, &record)?;
    traj.records.push(record);
    traj.samples.push(sample_of(&state));

    let ctrl = Controller::new(params.atol, params.rtol);
    let mut solver = StepSolver::new();
    let t_eps = 1e-12 * params.t_end.abs().max(1.0);
    loop {
        if detect_equilibrium(atlas, &state, params.equilibrium_tol) {
            finish(&mut traj, FlowEventKind::Equilibrium, state.t, "direct right-hand side below tolerance".into());
            break;
        }
        if state.t >= params.t_end - t_eps {
            finish(&mut traj, FlowEventKind::ReachedTEnd, state.t, String::new());
            break;
        }
        if traj.steps >= params.max_steps {
            finish(&mut traj, FlowEventKind::SolverFailure, state.t, format!("step budget {} exhausted", params.max_steps));
            break;
        }
        if state.dt < params.dt_min {
            finish(&mut traj, FlowEventKind::DtUnderflow, state.t, format!("dt = {:e}", state.dt));
            break;
        }
        let dt = state.dt.min(params.t_end - state.t);
        let attempt = if params.adaptive {
            doubling_step(atlas, &state, dt, &ctrl, &mut solver)
        } else {
            implicit_euler(atlas, &state, dt, &mut solver).map(|x| Attempt::Accepted { rho: x, dt_next: state.dt })
        };
        let (rho_next, dt_next) = match attempt {
            Ok(Attempt::Accepted { rho, dt_next }) => (rho, dt_next),
            Ok(Attempt::Rejected { dt_next }) => {
                traj.rejected += 1;
                state.dt = dt_next;
                continue;
            }
            Err(e) => {
                let (kind, msg) = classify(e)?;
                if params.adaptive && dt * ctrl.min_factor >= params.dt_min {
                    // the trial left the admissible set or its solve stalled; retry with a smaller step
                    traj.rejected += 1;
                    state.dt = dt * ctrl.min_factor;
                    continue;
                }
                finish(&mut traj, kind, state.t, msg);
                break;
            }
        };
        let t_next = state.t + dt;
        let next = match FlowState::new(atlas, t_next, dt_next, &rho_next) {
            Ok(s) => s,
            Err(e) => {
                let (kind, msg) = classify(e)?;
                finish(&mut traj, kind, t_next, msg);
                break;
            }
        };
        traj.steps += 1;
        let w_prev = state.report.willmore;
        if next.report.willmore > w_prev + ENERGY_SLACK * w_prev.abs() {
            traj.energy_violations.push(traj.steps);
        }
        state = next;
        let record = StepRecord { step: traj.steps, dt, report: state.report };
        sink(&state, &record)?;
        traj.records.push(record);
        if params.output_every > 0 && traj.steps.is_multiple_of(params.output_every) {
            traj.samples.push(sample_of(&state));
        }
    }
    if traj.samples.last().is_none_or(|s| s.t != state.t) {
        traj.samples.push(sample_of(&state));
    }
    traj.final_state = Some(state);
    Ok(traj)
}

enum Attempt {
    Accepted { rho: Vec<f64>, dt_next: f64 },
    Rejected { dt_next: f64 },
}

fn doubling_step(atlas: &GridAtlas, state: &FlowState, dt: f64, ctrl: &Controller, solver: &mut StepSolver) -> Result<Attempt> {
    let full = implicit_euler(atlas, state, dt, solver)?;
    let half = implicit_euler(atlas, state, 0.5 * dt, solver)?;
    let mid = FlowState::new(atlas, state.t + 0.5 * dt, 0.5 * dt, &half)?;
    let two_half = implicit_euler(atlas, &mid, 0.5 * dt, solver)?;
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = full.iter().zip(&two_half).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let tol = ctrl.tolerance(sup(state.rho()).max(sup(&two_half)));
    Ok(match adapt_dt(ctrl, err, tol, dt) {
        StepDecision::Accept { dt_next } => Attempt::Accepted { rho: two_half, dt_next },
        StepDecision::Reject { dt_next } => Attempt::Rejected { dt_next },
    })
}
