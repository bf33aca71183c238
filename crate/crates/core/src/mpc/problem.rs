//! Condensed tracking problem: the decision vector is `(x(0), u(0..N), ε(0..N))`
//! and every predicted state is an affine function of it, so the dynamics hold
//! exactly for any iterate.

use nalgebra::{DMatrix, DVector, Matrix3, RowDVector, Vector3};

use super::config::{MpcConfig, ObstaclePenalty, SoftSet};
use crate::arm::TaskMap;
use crate::error::{Error, Result};
use crate::linearize::DiscreteDynamics;
use crate::opt::{LocalQp, QpProblem, SqpModel};

/// Shifted previous solution used to seed the next problem.
#[derive(Debug, Clone)]
pub struct WarmStart {
    /// `N` inputs.
    pub inputs: Vec<DVector<f64>>,
    /// `N + 1` curvature vectors used as first linearization points.
    pub curvatures: Vec<DVector<f64>>,
}

pub struct MpcInstance<'a> {
    cfg: &'a MpcConfig,
    task: &'a dyn TaskMap,
    n: usize,
    m: usize,
    horizon: usize,
    bound_steps: usize,
    x_meas: DVector<f64>,
    u_old: DVector<f64>,
    refs: Vec<Vector3<f64>>,
    phi: Vec<DMatrix<f64>>,
    gamma: Vec<DMatrix<f64>>,
    offset: Vec<DVector<f64>>,
    penalty: Option<ObstaclePenalty>,
    soft: Option<SoftSet>,
    lin_points: Vec<DVector<f64>>,
    start_inputs: Vec<DVector<f64>>,
}

/// Assembles the tracking problem for one control loop. `refs` must hold at
/// least `N + 1` samples; extra samples are ignored. Obstacle penalty and
/// soft state set are attached separately.
pub fn build_problem<'a>(
    x_meas: &DVector<f64>,
    u_old: &DVector<f64>,
    refs: &[Vector3<f64>],
    dynamics: &DiscreteDynamics,
    cfg: &'a MpcConfig,
    task: &'a dyn TaskMap,
    warm: Option<&WarmStart>,
) -> Result<MpcInstance<'a>> {
    let (n, m, horizon) = (cfg.q_size(), cfg.n_inputs(), cfg.horizon);
    if refs.len() < horizon + 1 {
        return Err(Error::RefTooShort { needed: horizon + 1, got: refs.len() });
    }
    if x_meas.len() != 2 * n || u_old.len() != m || dynamics.n_states() != 2 * n || dynamics.n_inputs() != m {
        return Err(Error::Dimension("MPC state, input and model dimensions disagree".into()));
    }
    if !x_meas.iter().chain(u_old.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput("build_problem"));
    }
    let nu = horizon * m;
    let mut phi = vec![DMatrix::identity(2 * n, 2 * n)];
    let mut gamma = vec![DMatrix::zeros(2 * n, nu)];
    let mut offset = vec![DVector::zeros(2 * n)];
    for k in 0..horizon {
        phi.push(&dynamics.a * &phi[k]);
        let mut g = &dynamics.a * &gamma[k];
        g.view_mut((0, k * m), (2 * n, m)).copy_from(&dynamics.b);
        gamma.push(g);
        offset.push(&dynamics.a * &offset[k] + &dynamics.w);
    }
    let q_meas = x_meas.rows(0, n).into_owned();
    let (lin_points, start_inputs) = match warm {
        Some(w) if w.inputs.len() == horizon && w.curvatures.len() == horizon + 1 => {
            (w.curvatures.clone(), w.inputs.clone())
        }
        _ => (vec![q_meas; horizon + 1], vec![DVector::zeros(m); horizon]),
    };
    Ok(MpcInstance {
        cfg,
        task,
        n,
        m,
        horizon,
        bound_steps: cfg.bound_steps.count(horizon),
        x_meas: x_meas.clone(),
        u_old: u_old.clone(),
        refs: refs[..=horizon].to_vec(),
        phi,
        gamma,
        offset,
        penalty: None,
        soft: None,
        lin_points,
        start_inputs,
    })
}

/// Adds `Σ_k Σ_i L·exp(−l·‖E_q(k) − o_i‖²)` to the stage cost.
pub fn add_obstacle_penalty<'a>(instance: MpcInstance<'a>, penalty: &ObstaclePenalty) -> MpcInstance<'a> {
    MpcInstance { penalty: Some(penalty.clone()), ..instance }
}

/// Relaxes `A_I q(k) ≤ b_I` with non-negative slacks weighted by `E`.
pub fn soften_state_constraints<'a>(instance: MpcInstance<'a>, set: &SoftSet) -> MpcInstance<'a> {
    MpcInstance { soft: Some(set.clone()), ..instance }
}

/// Decoded decision vector.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    pub slacks: Vec<DVector<f64>>,
}

struct Accumulator {
    h: DMatrix<f64>,
    f: DVector<f64>,
    constant: f64,
}

impl Accumulator {
    /// Adds `(G v + h)ᵀ W (G v + h)`.
    fn quadratic(&mut self, g: &DMatrix<f64>, h: &DVector<f64>, w: &DMatrix<f64>) {
        let wg = w * g;
        self.h += g.transpose() * &wg * 2.0;
        self.f += wg.transpose() * h * 2.0;
        self.constant += h.dot(&(w * h));
    }
}

impl<'a> MpcInstance<'a> {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn bound_steps(&self) -> usize {
        self.bound_steps
    }

    fn n_slack(&self) -> usize {
        self.soft.as_ref().map_or(0, |s| s.b.len())
    }

    pub fn n_decision(&self) -> usize {
        2 * self.n + self.horizon * (self.m + self.n_slack())
    }

    fn input_offset(&self, k: usize) -> usize {
        2 * self.n + k * self.m
    }

    fn slack_offset(&self, k: usize) -> usize {
        2 * self.n + self.horizon * self.m + k * self.n_slack()
    }

    /// Starting decision vector: measured state, seeded inputs, zero slack.
    pub fn start(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.n_decision());
        v.rows_mut(0, 2 * self.n).copy_from(&self.x_meas);
        for (k, u) in self.start_inputs.iter().enumerate() {
            v.rows_mut(self.input_offset(k), self.m).copy_from(u);
        }
        v
    }

    /// `x(k) = M_k v + offset_k`.
    fn state_map(&self, k: usize) -> DMatrix<f64> {
        let two_n = 2 * self.n;
        let mut map = DMatrix::zeros(two_n, self.n_decision());
        map.view_mut((0, 0), (two_n, two_n)).copy_from(&self.phi[k]);
        map.view_mut((0, two_n), (two_n, self.horizon * self.m)).copy_from(&self.gamma[k]);
        map
    }

    fn selector(&self, offset: usize, len: usize) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(len, self.n_decision());
        for i in 0..len {
            s[(i, offset + i)] = 1.0;
        }
        s
    }

    pub fn decode(&self, v: &DVector<f64>) -> Trajectory {
        let two_n = 2 * self.n;
        let x0 = v.rows(0, two_n);
        let u = v.rows(two_n, self.horizon * self.m);
        let states = (0..=self.horizon)
            .map(|k| &self.phi[k] * x0 + &self.gamma[k] * u + &self.offset[k])
            .collect();
        let inputs = (0..self.horizon).map(|k| v.rows(self.input_offset(k), self.m).into_owned()).collect();
        let r = self.n_slack();
        let slacks = (0..self.horizon).map(|k| v.rows(self.slack_offset(k), r).into_owned()).collect();
        Trajectory { states, inputs, slacks }
    }

    fn weight(&self, k: usize) -> DMatrix<f64> {
        let w: &Matrix3<f64> = if k == self.horizon { &self.cfg.q_terminal } else { &self.cfg.q_track };
        DMatrix::from_column_slice(3, 3, w.as_slice())
    }

    /// Exact cost of a decision vector (nonlinear end-effector map and penalty).
    pub fn cost(&self, v: &DVector<f64>) -> f64 {
        let t = self.decode(v);
        let n = self.n;
        let mut total = 0.0;
        for k in 0..=self.horizon {
            let q = t.states[k].rows(0, n).into_owned();
            let e = self.task.position(&q);
            let err = DVector::from_column_slice((e - self.refs[k]).as_slice());
            total += err.dot(&(self.weight(k) * &err));
            if k == self.horizon {
                break;
            }
            let qd = t.states[k].rows(n, n);
            total += qd.dot(&(&self.cfg.s_velocity * qd));
            let u = &t.inputs[k];
            total += u.dot(&(&self.cfg.r_input * u));
            let du = if k == 0 { u - &self.u_old } else { u - &t.inputs[k - 1] };
            total += du.dot(&(&self.cfg.r_delta * &du));
            if let Some(p) = &self.penalty {
                total += p.value(&e);
            }
            if let Some(s) = &self.soft {
                total += t.slacks[k].dot(&(&s.weight * &t.slacks[k]));
            }
        }
        total
    }

    #[allow(clippy::needless_range_loop)]
    fn assemble(&self, lin: &[DVector<f64>]) -> LocalQp {
        let (n, m, nv) = (self.n, self.m, self.n_decision());
        let mut acc = Accumulator { h: DMatrix::zeros(nv, nv), f: DVector::zeros(nv), constant: 0.0 };
        for k in 0..=self.horizon {
            let map = self.state_map(k);
            let map_q = map.rows(0, n).into_owned();
            let off_q = self.offset[k].rows(0, n).into_owned();
            let qbar = &lin[k];
            let e = self.task.position(qbar);
            let jac = self.task.jacobian(qbar);
            let j = DMatrix::from_column_slice(3, n, jac.as_slice());
            // E(q) ≈ e + J (q − q̄); residual = G v + h
            let g = &j * &map_q;
            let ebar = DVector::from_column_slice(e.as_slice());
            let r = DVector::from_column_slice(self.refs[k].as_slice());
            let h = &j * (&off_q - qbar) + &ebar - &r;
            acc.quadratic(&g, &h, &self.weight(k));
            if k == self.horizon {
                break;
            }
            let map_qd = map.rows(n, n).into_owned();
            let off_qd = self.offset[k].rows(n, n).into_owned();
            acc.quadratic(&map_qd, &off_qd, &self.cfg.s_velocity);
            let su = self.selector(self.input_offset(k), m);
            acc.quadratic(&su, &DVector::zeros(m), &self.cfg.r_input);
            if k == 0 {
                acc.quadratic(&su, &(-&self.u_old), &self.cfg.r_delta);
            } else {
                let prev = self.selector(self.input_offset(k - 1), m);
                acc.quadratic(&(su - prev), &DVector::zeros(m), &self.cfg.r_delta);
            }
            if let Some(p) = &self.penalty {
                // value plus gradient along the linearized end-effector motion
                let grad = p.gradient(&e);
                let gv = DVector::from_column_slice(grad.as_slice());
                acc.f += g.transpose() * &gv;
                acc.constant += p.value(&e) + gv.dot(&(&h + &r - &ebar));
            }
            if let Some(s) = &self.soft {
                let se = self.selector(self.slack_offset(k), s.b.len());
                acc.quadratic(&se, &DVector::zeros(s.b.len()), &s.weight);
            }
        }
        for i in 0..nv {
            acc.h[(i, i)] += self.cfg.regularization;
        }
        acc.h = (&acc.h + acc.h.transpose()) * 0.5;

        let mut rows: Vec<(RowDVector<f64>, f64, f64, &'static str)> = Vec::new();
        let map_n = self.state_map(self.horizon);
        for i in 0..n {
            let b = -self.offset[self.horizon][n + i];
            rows.push((map_n.row(n + i).into_owned(), b, b, "terminal velocity"));
        }
        for i in 0..2 * n {
            let mut row = RowDVector::zeros(nv);
            row[i] = 1.0;
            rows.push((row, self.x_meas[i], self.x_meas[i], "initial state"));
        }
        for k in 0..self.bound_steps.min(self.horizon) {
            for i in 0..m {
                let mut row = RowDVector::zeros(nv);
                row[self.input_offset(k) + i] = 1.0;
                rows.push((row, self.cfg.p_min[i], self.cfg.p_max[i], "input bound"));
            }
        }
        for k in 0..=self.bound_steps.min(self.horizon - 1) {
            for i in 0..m {
                let mut row = RowDVector::zeros(nv);
                row[self.input_offset(k) + i] = 1.0;
                let (lo, hi) = if k == 0 {
                    (self.u_old[i] - self.cfg.slew[i], self.u_old[i] + self.cfg.slew[i])
                } else {
                    row[self.input_offset(k - 1) + i] = -1.0;
                    (-self.cfg.slew[i], self.cfg.slew[i])
                };
                rows.push((row, lo, hi, "input slew"));
            }
        }
        if let Some(s) = &self.soft {
            let nr = s.b.len();
            for k in 0..self.horizon {
                let map_q = self.state_map(k).rows(0, n).into_owned();
                let off_q = self.offset[k].rows(0, n).into_owned();
                let aq = &s.a * &map_q;
                let shift = &s.a * &off_q;
                for r in 0..nr {
                    let mut row = aq.row(r).into_owned();
                    row[self.slack_offset(k) + r] = -1.0;
                    rows.push((row, f64::NEG_INFINITY, s.b[r] - shift[r], "state set"));
                    let mut pos = RowDVector::zeros(nv);
                    pos[self.slack_offset(k) + r] = 1.0;
                    rows.push((pos, 0.0, f64::INFINITY, "slack sign"));
                }
            }
        }
        let (eq, ineq): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.1 == r.2);
        let stack = |rs: &[(RowDVector<f64>, f64, f64, &'static str)]| {
            let mut a = DMatrix::zeros(rs.len(), nv);
            for (i, r) in rs.iter().enumerate() {
                a.row_mut(i).copy_from(&r.0);
            }
            let lo = DVector::from_iterator(rs.len(), rs.iter().map(|r| r.1));
            let hi = DVector::from_iterator(rs.len(), rs.iter().map(|r| r.2));
            (a, lo, hi)
        };
        let (a_eq, b_eq, _) = stack(&eq);
        let (a_in, lo, hi) = stack(&ineq);
        let row_families = eq.iter().chain(ineq.iter()).map(|r| r.3).collect();
        let qp = QpProblem::new(acc.h, acc.f).with_equalities(a_eq, b_eq).with_inequalities(a_in, lo, hi);
        LocalQp { qp, constant: acc.constant, row_families }
    }

    /// Quadratic model about the trajectory of `v`.
    pub fn local_model(&self, v: &DVector<f64>) -> LocalQp {
        let t = self.decode(v);
        let lin: Vec<DVector<f64>> = t.states.iter().map(|x| x.rows(0, self.n).into_owned()).collect();
        self.assemble(&lin)
    }
}

impl SqpModel for MpcInstance<'_> {
    fn n_vars(&self) -> usize {
        self.n_decision()
    }

    fn local_qp(&self, v: &DVector<f64>, first: bool) -> Result<LocalQp> {
        if first {
            Ok(self.assemble(&self.lin_points))
        } else {
            Ok(self.local_model(v))
        }
    }

    fn true_cost(&self, v: &DVector<f64>) -> Result<f64> {
        let c = self.cost(v);
        if c.is_finite() {
            Ok(c)
        } else {
            Err(Error::NonFinite("MPC cost"))
        }
    }
}
