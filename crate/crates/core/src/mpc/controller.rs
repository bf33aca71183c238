use std::time::Instant;

use nalgebra::{DMatrix, DVector, Vector3};

use super::config::MpcConfig;
use super::problem::{add_obstacle_penalty, build_problem, soften_state_constraints, WarmStart};
use crate::arm::{ArmGeometry, ArmTaskMap, PseudoPressure, SegmentLength};
use crate::dynamics::{dynamics_terms, DynamicsParams};
use crate::error::{Error, Result};
use crate::linearize::{continuous_ss, discretize, DiscreteDynamics};
use crate::opt::{solve_dare, sqp_solve, QpStatus, SqpStatus};

/// The controller's internal model of the arm.
#[derive(Debug, Clone)]
pub struct ControlModel {
    pub geometry: ArmGeometry,
    pub params: DynamicsParams,
    pub task: ArmTaskMap,
}

impl ControlModel {
    pub fn new(geometry: ArmGeometry, params: DynamicsParams, length: SegmentLength) -> Self {
        let task = ArmTaskMap::new(geometry.clone(), length);
        ControlModel { geometry, params, task }
    }

    /// Discrete model frozen at `x = (q, q̇)`.
    pub fn linearize(&self, x: &DVector<f64>, cfg: &MpcConfig) -> Result<DiscreteDynamics> {
        let n = self.geometry.q_size();
        let q = x.rows(0, n).into_owned();
        let qd = x.rows(n, n).into_owned();
        let terms = dynamics_terms(&q, &qd, &self.geometry, &self.params)?;
        discretize(&continuous_ss(&terms)?, cfg.ts, cfg.drift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A subproblem or the outer loop hit its iteration cap; the best
    /// feasible iterate was used.
    MaxIter,
    /// The solver failed and the previous plan was shifted and held.
    Fallback,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "maxiter",
            SolveStatus::Fallback => "fallback",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MpcSolution {
    /// Nominal inputs `u(0..N)`.
    pub inputs: Vec<DVector<f64>>,
    /// Predicted `(q, q̇)(0..=N)`.
    pub states: Vec<DVector<f64>>,
    /// Slacks `ε(0..N)`; empty vectors without a soft set.
    pub slacks: Vec<DVector<f64>>,
    pub objective: f64,
    pub status: SolveStatus,
    pub outer_iterations: usize,
    pub qp_iterations: usize,
    pub solve_ms: f64,
    /// False when the Riccati iteration failed and the tube gain was zeroed.
    pub dare_converged: bool,
    pub diagnostics: Option<String>,
}

impl MpcSolution {
    pub fn slack_norm(&self) -> f64 {
        self.slacks.iter().map(|s| s.norm_squared()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ControllerState {
    /// Last applied pseudo-pressure.
    pub u_old: DVector<f64>,
    pub k_tube: DMatrix<f64>,
    pub warm: Option<WarmStart>,
    /// State the previous plan predicted for the current step.
    pub predicted: Option<DVector<f64>>,
    cached_a: Option<DMatrix<f64>>,
}

impl ControllerState {
    pub fn new(u_old: DVector<f64>, q_size: usize) -> Self {
        let m = u_old.len();
        ControllerState { u_old, k_tube: DMatrix::zeros(m, 2 * q_size), warm: None, predicted: None, cached_a: None }
    }
}

/// Applied command and what produced it.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub pressure: PseudoPressure,
    pub solution: MpcSolution,
    /// True when the tube correction was cut by the clamp on some channel.
    pub clamped: bool,
}

/// `p* = u0 + K (measured − nominal)`, limited to `u0 ± clamp`, then to the
/// absolute bounds. Also reports whether the clamp cut the correction.
pub fn tube_feedback(
    u0: &DVector<f64>,
    k: &DMatrix<f64>,
    measured: &DVector<f64>,
    nominal: &DVector<f64>,
    clamp: &DVector<f64>,
    p_min: &DVector<f64>,
    p_max: &DVector<f64>,
) -> (PseudoPressure, bool) {
    let correction = k * (measured - nominal);
    let mut clamped = false;
    let p = DVector::from_fn(u0.len(), |i, _| {
        let c = correction[i];
        if c.abs() > clamp[i] {
            clamped = true;
        }
        (u0[i] + c.clamp(-clamp[i], clamp[i])).clamp(p_min[i], p_max[i])
    });
    (PseudoPressure(p), clamped)
}

/// Nominal state for the tube correction: the previous prediction, moved
/// toward the measurement until the deviation lies in the initial polytope
/// with half-widths `(Q_0, Q̇_0)`. Without a prediction it is the measurement.
pub fn tube_nominal(measured: &DVector<f64>, predicted: Option<&DVector<f64>>, cfg: &MpcConfig) -> DVector<f64> {
    let Some(pred) = predicted else {
        return measured.clone();
    };
    let n = cfg.q_size();
    DVector::from_fn(measured.len(), |i, _| {
        let w = if i < n { cfg.initial_q_offset[i] } else { cfg.initial_qd_offset[i - n] };
        measured[i] - (measured[i] - pred[i]).clamp(-w, w)
    })
}

fn shift<T: Clone>(v: &[T]) -> Vec<T> {
    let mut out = v[1..].to_vec();
    out.push(v[v.len() - 1].clone());
    out
}

/// One control loop: linearize, compute the tube gain, solve the nominal
/// problem and apply the tube correction. Solver failures fall back to the
/// previous plan shifted by one step.
pub fn solve_controller_step(
    x_meas: &DVector<f64>,
    refs: &[Vector3<f64>],
    cfg: &MpcConfig,
    model: &ControlModel,
    ctrl: &mut ControllerState,
) -> Result<StepOutput> {
    let start = Instant::now();
    let n = model.geometry.q_size();
    for i in 0..cfg.n_inputs() {
        if cfg.p_min[i].max(ctrl.u_old[i] - cfg.slew[i]) > cfg.p_max[i].min(ctrl.u_old[i] + cfg.slew[i]) {
            return Err(Error::Infeasible(format!("input {i}: bounds and slew window from the previous input do not intersect")));
        }
    }
    let dynamics = model.linearize(x_meas, cfg)?;

    let reuse = match (cfg.dare_cache_tol, &ctrl.cached_a) {
        (Some(tol), Some(a)) => (&dynamics.a - a).norm() < tol,
        _ => false,
    };
    let mut dare_converged = true;
    if !reuse {
        match solve_dare(&dynamics.a, &dynamics.b, &cfg.dare_q, &cfg.dare_r) {
            Ok(sol) => ctrl.k_tube = sol.k,
            Err(_) => {
                ctrl.k_tube = DMatrix::zeros(cfg.n_inputs(), 2 * n);
                dare_converged = false;
            }
        }
        ctrl.cached_a = if dare_converged { Some(dynamics.a.clone()) } else { None };
    }

    let warm = match cfg.initialization {
        super::Initialization::Warm => ctrl.warm.as_ref(),
        super::Initialization::Cold => None,
    };
    let mut instance = build_problem(x_meas, &ctrl.u_old, refs, &dynamics, cfg, &model.task, warm)?;
    if let Some(p) = &cfg.obstacles {
        instance = add_obstacle_penalty(instance, p);
    }
    if let Some(s) = &cfg.soft_set {
        instance = soften_state_constraints(instance, s);
    }

    let mut solution = match sqp_solve(&instance, &instance.start(), &cfg.sqp) {
        Ok(r) => {
            let t = instance.decode(&r.v);
            let status = if r.qp_status == QpStatus::MaxIter || r.status == SqpStatus::MaxOuter {
                SolveStatus::MaxIter
            } else {
                SolveStatus::Optimal
            };
            MpcSolution {
                inputs: t.inputs,
                states: t.states,
                slacks: t.slacks,
                objective: r.cost,
                status,
                outer_iterations: r.outer_iterations,
                qp_iterations: r.qp_iterations,
                solve_ms: 0.0,
                dare_converged,
                diagnostics: None,
            }
        }
        Err(e @ (Error::Infeasible(_) | Error::MaxIter(_) | Error::NotConverged { .. } | Error::NonFinite(_))) => {
            fallback(x_meas, &dynamics, cfg, ctrl, dare_converged, e.to_string())
        }
        Err(e) => return Err(e),
    };

    // the applied nominal input honours bounds and slew exactly
    let u0 = DVector::from_fn(cfg.n_inputs(), |i, _| {
        let lo = cfg.p_min[i].max(ctrl.u_old[i] - cfg.slew[i]);
        let hi = cfg.p_max[i].min(ctrl.u_old[i] + cfg.slew[i]);
        solution.inputs[0][i].clamp(lo, hi)
    });
    let nominal = tube_nominal(x_meas, ctrl.predicted.as_ref(), cfg);
    let (pressure, clamped) = tube_feedback(&u0, &ctrl.k_tube, x_meas, &nominal, &cfg.tube_clamp, &cfg.p_min, &cfg.p_max);

    ctrl.predicted = Some(solution.states[1].clone());

    ctrl.u_old = pressure.0.clone();
    ctrl.warm = Some(WarmStart {
        inputs: shift(&solution.inputs),
        curvatures: shift(&solution.states).into_iter().map(|x| x.rows(0, n).into_owned()).collect(),
    });
    solution.solve_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(StepOutput { pressure, solution, clamped })
}

fn fallback(
    x_meas: &DVector<f64>,
    dynamics: &DiscreteDynamics,
    cfg: &MpcConfig,
    ctrl: &ControllerState,
    dare_converged: bool,
    reason: String,
) -> MpcSolution {
    let inputs = match &ctrl.warm {
        Some(w) => w.inputs.clone(),
        None => vec![ctrl.u_old.clone(); cfg.horizon],
    };
    let mut states = vec![x_meas.clone()];
    for u in &inputs {
        let next = dynamics.step(states.last().expect("non-empty"), u);
        states.push(next);
    }
    let r = cfg.soft_set.as_ref().map_or(0, |s| s.b.len());
    MpcSolution {
        inputs,
        states,
        slacks: vec![DVector::zeros(r); cfg.horizon],
        objective: f64::NAN,
        status: SolveStatus::Fallback,
        outer_iterations: 0,
        qp_iterations: 0,
        solve_ms: 0.0,
        dare_converged,
        diagnostics: Some(reason),
    }
}
