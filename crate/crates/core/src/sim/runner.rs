use std::time::Instant;

use nalgebra::{DVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::baseline::{inverse_kinematics, quasi_static_step, static_pressure, QuasiStaticGains};
use super::plant::{Plant, PlantState};
use super::scenario::{ControllerKind, InitialState, Scenario};
use crate::arm::{chamber_to_pseudo, pseudo_to_chamber, ArmTaskMap, PseudoPressure, SegmentLength, TaskMap};
use crate::error::{Error, Result};
use crate::finder::{box_to_polytope, find_constraint_set, ConstraintBox};
use crate::mpc::{solve_controller_step, ControlModel, ControllerState, MpcConfig, ObstaclePenalty, SoftSet};

/// One control period as logged.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub reference: Vector3<f64>,
    /// True end-effector position.
    pub ee: Vector3<f64>,
    /// Observed curvature (noisy when noise is enabled).
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    /// Nominal first input `u(0)`; the quasi-static command for the baseline.
    pub u: DVector<f64>,
    /// Applied chamber pressures.
    pub chamber: DVector<f64>,
    pub solve_ms: f64,
    pub status: String,
    pub slack_norm: f64,
    /// Smallest end-effector distance to an obstacle surface; infinite without obstacles.
    pub min_clearance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub q_size: usize,
    pub n_segments: usize,
    pub records: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub steps: usize,
    /// Over steps with `t ≥ transient`; NaN when there are none.
    pub rmse: f64,
    pub max_error: f64,
    pub min_clearance: f64,
    pub mean_solve_ms: f64,
    pub max_solve_ms: f64,
    pub deadline_misses: usize,
    /// Applied inputs outside bounds, negative chambers, or slew beyond `Δu + clamp`.
    pub constraint_violations: usize,
    pub clamp_active_steps: usize,
    pub fallback_steps: usize,
    pub max_slack_norm: f64,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub log: SimLog,
    pub metrics: Metrics,
    /// Set when the plant blew up; the log holds every step before it.
    pub abort: Option<Error>,
    /// Constraint box used by the soft controller.
    pub constraint_box: Option<ConstraintBox>,
}

fn clearance(ee: &Vector3<f64>, scenario: &Scenario) -> f64 {
    scenario
        .obstacles
        .iter()
        .map(|o| (ee - o.center()).norm() - o.radius)
        .fold(f64::INFINITY, f64::min)
}

pub fn compute_metrics(log: &SimLog, scenario: &Scenario) -> Metrics {
    let ts = scenario.ts();
    let mut sq = 0.0;
    let mut count = 0usize;
    let mut max_error: f64 = 0.0;
    let mut min_clearance = f64::INFINITY;
    let mut solve = Vec::with_capacity(log.records.len());
    let mut max_slack: f64 = 0.0;
    let (mut clamps, mut fallbacks) = (0, 0);
    for r in &log.records {
        let e = (r.ee - r.reference).norm();
        if r.t >= scenario.transient - 1e-9 {
            sq += e * e;
            count += 1;
            max_error = max_error.max(e);
        }
        min_clearance = min_clearance.min(r.min_clearance);
        solve.push(r.solve_ms);
        max_slack = max_slack.max(r.slack_norm);
        clamps += r.status.contains("+clamp") as usize;
        fallbacks += r.status.starts_with("fallback") as usize;
    }
    let mean_solve = if solve.is_empty() { 0.0 } else { solve.iter().sum::<f64>() / solve.len() as f64 };
    Metrics {
        steps: log.records.len(),
        rmse: if count > 0 { (sq / count as f64).sqrt() } else { f64::NAN },
        max_error: if count > 0 { max_error } else { f64::NAN },
        min_clearance,
        mean_solve_ms: mean_solve,
        max_solve_ms: solve.iter().copied().fold(0.0, f64::max),
        deadline_misses: solve.iter().filter(|s| **s > ts * 1e3).count(),
        constraint_violations: 0,
        clamp_active_steps: clamps,
        fallback_steps: fallbacks,
        max_slack_norm: max_slack,
    }
}

/// Controller configuration for the scenario's controller kind, running the
/// constraint finder when the soft controller has no precomputed box.
pub fn controller_config(scenario: &Scenario) -> Result<(MpcConfig, Option<ConstraintBox>)> {
    let mut cfg = scenario.mpc.clone();
    cfg.ts = scenario.ts();
    let mut used_box = None;
    match scenario.controller {
        ControllerKind::PenalizedMpc => {
            cfg.obstacles = Some(ObstaclePenalty {
                centers: scenario.obstacles.iter().map(|o| o.center()).collect(),
                gain: scenario.penalty.0,
                decay: scenario.penalty.1,
            });
        }
        ControllerKind::SoftMpc => {
            let b = match (&scenario.constraint_box, &scenario.finder) {
                (Some(b), _) => b.clone(),
                (None, Some(f)) => find_constraint_set(f, &scenario.geometry)?.constraint_box,
                (None, None) => return Err(Error::config("controller", "soft_mpc needs a [box] or a [finder] table")),
            };
            let (a, rhs) = box_to_polytope(&b);
            let rows = rhs.len();
            cfg.soft_set = Some(SoftSet { a, b: rhs, weight: nalgebra::DMatrix::identity(rows, rows) * scenario.soft_weight });
            used_box = Some(b);
        }
        ControllerKind::RobustMpc | ControllerKind::QuasiStatic => {}
    }
    Ok((cfg, used_box))
}

/// Runs the closed loop at the scenario rate: observe, decide, convert to
/// chamber pressures, integrate the plant over one period.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutcome> {
    let geom = &scenario.geometry;
    let (n, m) = (geom.q_size(), geom.n_inputs());
    let ts = scenario.ts();
    let (cfg, used_box) = controller_config(scenario)?;
    let model = ControlModel::new(geom.clone(), scenario.params.clone(), SegmentLength::Chord);
    let truth = Plant {
        geometry: geom.with_mass_scale(1.0 + scenario.perturbation),
        params: scenario.params.with_stiffness_scale(1.0 - scenario.perturbation),
        options: scenario.plant.clone(),
    };
    let task = ArmTaskMap::new(geom.clone(), SegmentLength::Chord);

    let mut state = PlantState::at_rest(n, m);
    let mut u_old = DVector::zeros(m);
    if scenario.initial == InitialState::Reference {
        let target = scenario.trajectory.sample(0.0);
        let q0 = inverse_kinematics(&target, &DVector::from_element(n, 0.05), &task, 200);
        let p0 = static_pressure(&q0, geom, &scenario.params, &cfg.p_min, &cfg.p_max)?;
        state.q = q0;
        state.p_eff = p0.0.clone();
        u_old = p0.0;
    }
    let mut ctrl = ControllerState::new(u_old.clone(), n);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    noise_rng.set_stream(1);

    let mut log = SimLog { q_size: n, n_segments: geom.n_segments, records: Vec::new() };
    let mut violations = 0usize;
    let mut actual_ms = Vec::new();
    let mut abort = None;
    for i in 0..scenario.steps() {
        let t = i as f64 * ts;
        let x_obs = truth.observe(&state, &mut noise_rng);
        let refs = scenario.trajectory.window(t, ts, cfg.horizon + 1);
        let started = Instant::now();
        let (pressure, nominal, status, slack) = match scenario.controller {
            ControllerKind::QuasiStatic => {
                let q = x_obs.rows(0, n).into_owned();
                let p = match quasi_static_step(&q, &refs[0], scenario.baseline, &task, geom, &scenario.params, &cfg.p_min, &cfg.p_max) {
                    Ok(p) => p,
                    Err(e) => {
                        abort = Some(e);
                        break;
                    }
                };
                (p.clone(), p.0, "quasi_static".to_string(), 0.0)
            }
            _ => {
                let out = match solve_controller_step(&x_obs, &refs, &cfg, &model, &mut ctrl) {
                    Ok(out) => out,
                    Err(e) => {
                        abort = Some(e);
                        break;
                    }
                };
                let mut status = out.solution.status.as_str().to_string();
                if out.clamped {
                    status.push_str("+clamp");
                }
                let slack = out.solution.slack_norm();
                (out.pressure, out.solution.inputs[0].clone(), status, slack)
            }
        };
        let solve_ms = started.elapsed().as_secs_f64() * 1e3;
        actual_ms.push(solve_ms);
        let chamber = pseudo_to_chamber(&pressure, geom);
        let applied = chamber_to_pseudo(&chamber, geom)?;

        let slew_ok = scenario.controller == ControllerKind::QuasiStatic
            || (0..m).all(|j| (applied.0[j] - u_old[j]).abs() <= cfg.slew[j] + cfg.tube_clamp[j] + 1e-9);
        let bounds_ok = (0..m).all(|j| cfg.p_min[j] - 1e-9 <= pressure.0[j] && pressure.0[j] <= cfg.p_max[j] + 1e-9);
        if !(slew_ok && bounds_ok && chamber.0.iter().all(|c| *c >= 0.0)) {
            violations += 1;
        }
        u_old = applied.0.clone();

        let ee = task.position(&state.q);
        log.records.push(StepRecord {
            t,
            reference: refs[0],
            ee,
            q: x_obs.rows(0, n).into_owned(),
            qd: x_obs.rows(n, n).into_owned(),
            u: nominal,
            chamber: chamber.0.clone(),
            solve_ms: if scenario.log_solve_time { solve_ms } else { 0.0 },
            status,
            slack_norm: slack,
            min_clearance: clearance(&ee, scenario),
        });
        match truth.step(&state, &applied.0, ts) {
            Ok(next) => state = next,
            Err(e) => {
                abort = Some(e);
                break;
            }
        }
    }
    let mut metrics = compute_metrics(&log, scenario);
    metrics.constraint_violations = violations;
    if !actual_ms.is_empty() {
        metrics.mean_solve_ms = actual_ms.iter().sum::<f64>() / actual_ms.len() as f64;
        metrics.max_solve_ms = actual_ms.iter().copied().fold(0.0, f64::max);
        metrics.deadline_misses = actual_ms.iter().filter(|s| **s > ts * 1e3).count();
    }
    Ok(RunOutcome { log, metrics, abort, constraint_box: used_box })
}

/// Pressure applied to a plant in the log's `i`-th step, as pseudo-pressure.
pub fn applied_pseudo(log: &SimLog, i: usize, geom: &crate::arm::ArmGeometry) -> Result<PseudoPressure> {
    chamber_to_pseudo(&crate::arm::ChamberPressure(log.records[i].chamber.clone()), geom)
}

/// One point of a quasi-static gain search.
#[derive(Debug, Clone)]
pub struct TuningPoint {
    pub gains: QuasiStaticGains,
    pub metrics: Metrics,
    pub aborted: bool,
}

/// Runs the scenario under the quasi-static controller for every
/// `(gain, damping)` pair and returns the grid together with the index of the
/// best stable point: no abort, finite RMSE, lowest RMSE.
pub fn tune_quasi_static(scenario: &Scenario, gains: &[f64], dampings: &[f64]) -> Result<(Vec<TuningPoint>, Option<usize>)> {
    let mut grid = Vec::with_capacity(gains.len() * dampings.len());
    for &gain in gains {
        for &damping in dampings {
            let mut sc = scenario.clone();
            sc.controller = ControllerKind::QuasiStatic;
            sc.baseline = QuasiStaticGains { gain, damping };
            let outcome = run_scenario(&sc)?;
            grid.push(TuningPoint { gains: sc.baseline, metrics: outcome.metrics, aborted: outcome.abort.is_some() });
        }
    }
    let best = grid
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.aborted && p.metrics.rmse.is_finite())
        .min_by(|a, b| a.1.metrics.rmse.total_cmp(&b.1.metrics.rmse))
        .map(|(i, _)| i);
    Ok((grid, best))
}
