//! Dense convex QP solver: ADMM operator splitting with Ruiz equilibration,
//! over-relaxation, residual-balanced penalty updates and active-set polishing.
//!
//! Solves `min ½xᵀHx + fᵀx` subject to `A_eq x = b_eq` and
//! `lower ≤ A_in x ≤ upper`. Dual variables follow the convention
//! `Hx + f + Cᵀy = 0`, with `y > 0` on active upper bounds and `y < 0` on
//! active lower bounds (`C` stacks the equality rows above the inequality rows).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct QpProblem {
    pub h: DMatrix<f64>,
    pub f: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub a_in: DMatrix<f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl QpProblem {
    /// Unconstrained problem.
    pub fn new(h: DMatrix<f64>, f: DVector<f64>) -> Self {
        let n = f.len();
        QpProblem {
            h,
            f,
            a_eq: DMatrix::zeros(0, n),
            b_eq: DVector::zeros(0),
            a_in: DMatrix::zeros(0, n),
            lower: DVector::zeros(0),
            upper: DVector::zeros(0),
        }
    }

    pub fn with_equalities(mut self, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        self.a_eq = a;
        self.b_eq = b;
        self
    }

    pub fn with_inequalities(mut self, a: DMatrix<f64>, lower: DVector<f64>, upper: DVector<f64>) -> Self {
        self.a_in = a;
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn n_vars(&self) -> usize {
        self.f.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.a_eq.nrows() + self.a_in.nrows()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.h * x)) + self.f.dot(x)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        let dims_ok = self.h.nrows() == n
            && self.h.ncols() == n
            && self.a_eq.ncols() == n
            && self.a_eq.nrows() == self.b_eq.len()
            && self.a_in.ncols() == n
            && self.a_in.nrows() == self.lower.len()
            && self.a_in.nrows() == self.upper.len();
        if !dims_ok {
            return Err(Error::Dimension("inconsistent QP dimensions".into()));
        }
        let asym = (&self.h - self.h.transpose()).amax();
        if asym > 1e-9 * self.h.amax().max(1.0) {
            return Err(Error::Dimension(format!("QP Hessian is not symmetric (asymmetry {asym:e})")));
        }
        if self.lower.iter().zip(self.upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::Infeasible("inequality lower bound exceeds upper bound".into()));
        }
        Ok(())
    }

    /// Stacked constraint matrix and bounds, equality rows first.
    pub fn stacked(&self) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
        let n = self.n_vars();
        let (me, mi) = (self.a_eq.nrows(), self.a_in.nrows());
        let mut c = DMatrix::zeros(me + mi, n);
        c.view_mut((0, 0), (me, n)).copy_from(&self.a_eq);
        c.view_mut((me, 0), (mi, n)).copy_from(&self.a_in);
        let mut l = DVector::zeros(me + mi);
        let mut u = DVector::zeros(me + mi);
        l.rows_mut(0, me).copy_from(&self.b_eq);
        u.rows_mut(0, me).copy_from(&self.b_eq);
        l.rows_mut(me, mi).copy_from(&self.lower);
        u.rows_mut(me, mi).copy_from(&self.upper);
        (c, l, u)
    }

    /// KKT residuals of a primal-dual pair, recomputed from the problem data.
    pub fn kkt_residuals(&self, x: &DVector<f64>, y: &DVector<f64>) -> KktResiduals {
        let (c, l, u) = self.stacked();
        let z = &c * x;
        let mut primal = 0.0_f64;
        let mut complementarity = 0.0_f64;
        for i in 0..z.len() {
            primal = primal.max(l[i] - z[i]).max(z[i] - u[i]);
            let (yp, ym) = (y[i].max(0.0), (-y[i]).max(0.0));
            let up = if u[i].is_finite() { yp * (u[i] - z[i]).abs() } else { yp };
            let lo = if l[i].is_finite() { ym * (z[i] - l[i]).abs() } else { ym };
            complementarity = complementarity.max(up).max(lo);
        }
        let stationarity = (&self.h * x + &self.f + c.transpose() * y).amax();
        KktResiduals { primal, stationarity, complementarity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    pub primal: f64,
    pub stationarity: f64,
    pub complementarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

/// A constraint row (index into the stacked rows) found active at the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveConstraint {
    Equality(usize),
    Lower(usize),
    Upper(usize),
}

#[derive(Debug, Clone)]
pub struct QpSettings {
    pub tol_feas: f64,
    pub tol_stat: f64,
    pub max_iter: usize,
    pub rho: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub scaling_iters: usize,
    pub adaptive_rho_interval: usize,
    pub check_interval: usize,
    pub polish: bool,
    /// Iterations before the first polish attempt; the gap doubles after each failure.
    pub polish_interval: usize,
    pub infeasibility_tol: f64,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            tol_feas: 1e-8,
            tol_stat: 1e-8,
            max_iter: 4000,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            scaling_iters: 10,
            adaptive_rho_interval: 25,
            check_interval: 5,
            polish: true,
            polish_interval: 25,
            infeasibility_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub objective: f64,
    pub status: QpStatus,
    pub iterations: usize,
    pub polished: bool,
    pub active_set: Vec<ActiveConstraint>,
    pub residuals: KktResiduals,
    /// Dual ray certifying infeasibility, when `status == Infeasible`.
    pub certificate: Option<DVector<f64>>,
}

/// Solves a QP from a cold start.
pub fn solve_qp(problem: &QpProblem, settings: &QpSettings) -> Result<QpSolution> {
    solve_qp_warm(problem, settings, None)
}

struct Scaled {
    p: DMatrix<f64>,
    q: DVector<f64>,
    a: DMatrix<f64>,
    l: DVector<f64>,
    u: DVector<f64>,
    d: DVector<f64>,
    e: DVector<f64>,
    c: f64,
}

fn limit(v: f64) -> f64 {
    if v < 1e-4 {
        1.0
    } else {
        v.min(1e4)
    }
}

fn ruiz(h: &DMatrix<f64>, f: &DVector<f64>, c: &DMatrix<f64>, l: &DVector<f64>, u: &DVector<f64>, iters: usize) -> Scaled {
    let (n, m) = (h.nrows(), c.nrows());
    let mut p = h.clone();
    let mut a = c.clone();
    let mut q = f.clone();
    let mut d = DVector::from_element(n, 1.0);
    let mut e = DVector::from_element(m, 1.0);
    for _ in 0..iters {
        let dd = DVector::from_fn(n, |j, _| {
            let pc = p.column(j).amax();
            let ac = if m > 0 { a.column(j).amax() } else { 0.0 };
            1.0 / limit(pc.max(ac)).sqrt()
        });
        let de = DVector::from_fn(m, |i, _| 1.0 / limit(a.row(i).amax()).sqrt());
        for j in 0..n {
            for i in 0..n {
                p[(i, j)] *= dd[i] * dd[j];
            }
            for i in 0..m {
                a[(i, j)] *= de[i] * dd[j];
            }
        }
        q.component_mul_assign(&dd);
        d.component_mul_assign(&dd);
        e.component_mul_assign(&de);
    }
    let mean_col = if n > 0 {
        (0..n).map(|j| p.column(j).amax()).sum::<f64>() / n as f64
    } else {
        1.0
    };
    let cost = 1.0 / limit(mean_col.max(q.amax()));
    p *= cost;
    q *= cost;
    let l = l.component_mul(&e);
    let u = u.component_mul(&e);
    Scaled { p, q, a, l, u, d, e, c: cost }
}

fn factor(s: &Scaled, sigma: f64, rho: &DVector<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = s.p.nrows();
    let mut k = &s.p + DMatrix::identity(n, n) * sigma;
    if s.a.nrows() > 0 {
        let ra = DMatrix::from_fn(s.a.nrows(), n, |i, j| rho[i] * s.a[(i, j)]);
        k += s.a.transpose() * ra;
    }
    k.cholesky()
        .ok_or_else(|| Error::Dimension("QP Hessian is not positive semidefinite".into()))
}

fn row_kind(l: f64, u: f64) -> RowKind {
    if l == u {
        RowKind::Equality
    } else if l == f64::NEG_INFINITY && u == f64::INFINITY {
        RowKind::Free
    } else {
        RowKind::Inequality
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Equality,
    Inequality,
    Free,
}

fn rho_vector(kinds: &[RowKind], rho: f64) -> DVector<f64> {
    DVector::from_iterator(
        kinds.len(),
        kinds.iter().map(|k| match k {
            RowKind::Equality => 1e3 * rho,
            RowKind::Inequality => rho,
            RowKind::Free => 1e-6,
        }),
    )
}

/// Solves a QP, optionally warm-started from an unscaled primal-dual pair.
pub fn solve_qp_warm(
    problem: &QpProblem,
    settings: &QpSettings,
    warm: Option<(&DVector<f64>, &DVector<f64>)>,
) -> Result<QpSolution> {
    problem.validate()?;
    let (c, l, u) = problem.stacked();
    let (n, m) = (problem.n_vars(), c.nrows());
    let s = ruiz(&problem.h, &problem.f, &c, &l, &u, settings.scaling_iters);
    let kinds: Vec<RowKind> = (0..m).map(|i| row_kind(l[i], u[i])).collect();

    let mut rho = settings.rho;
    let mut rho_vec = rho_vector(&kinds, rho);
    let mut chol = factor(&s, settings.sigma, &rho_vec)?;

    let (mut x, mut y) = match warm {
        Some((xw, yw)) if xw.len() == n && yw.len() == m => (
            xw.component_div(&s.d),
            yw.component_div(&s.e) * s.c,
        ),
        Some((xw, _)) if xw.len() == n => (xw.component_div(&s.d), DVector::zeros(m)),
        _ => (DVector::zeros(n), DVector::zeros(m)),
    };
    let clamp = |v: &DVector<f64>| DVector::from_fn(m, |i, _| v[i].clamp(s.l[i], s.u[i]));
    let mut z = clamp(&(&s.a * &x));

    let unscaled = |xs: &DVector<f64>, ys: &DVector<f64>| (xs.component_mul(&s.d), ys.component_mul(&s.e) / s.c);
    let mut last_polish = 0usize;
    let mut polish_gap = settings.polish_interval.max(1);
    let mut iterations = 0;
    let mut converged = false;
    let mut certificate = None;

    for k in 1..=settings.max_iter {
        iterations = k;
        let x_prev = x.clone();
        let z_prev = z.clone();
        let y_prev = y.clone();
        let rhs = &x_prev * settings.sigma - &s.q + s.a.transpose() * (rho_vec.component_mul(&z_prev) - &y_prev);
        let xt = chol.solve(&rhs);
        let zt = &s.a * &xt;
        x = &xt * settings.alpha + &x_prev * (1.0 - settings.alpha);
        let zr = &zt * settings.alpha + &z_prev * (1.0 - settings.alpha);
        z = clamp(&(&zr + y_prev.component_div(&rho_vec)));
        y = &y_prev + rho_vec.component_mul(&(&zr - &z));

        if k % settings.check_interval != 0 && k != settings.max_iter {
            continue;
        }
        let ax = &s.a * &x;
        let px = &s.p * &x;
        let aty = s.a.transpose() * &y;
        let prim = (&ax - &z).component_div(&s.e).amax();
        let dual = (&px + &s.q + &aty).component_div(&s.d).amax() / s.c;
        if !(prim.is_finite() && dual.is_finite()) {
            return Err(Error::NonFinite("solve_qp"));
        }
        if prim <= settings.tol_feas && dual <= settings.tol_stat {
            converged = true;
            break;
        }
        if settings.polish && k >= last_polish + polish_gap {
            last_polish = k;
            polish_gap *= 2;
            let (xu, yu) = unscaled(&x, &y);
            if let Some(sol) = polish(problem, &c, &l, &u, &xu, &yu, &s, &z, settings) {
                return Ok(QpSolution { iterations: k, ..sol });
            }
        }

        // infeasibility certificate from the dual iterate difference
        let dy = &y - &y_prev;
        if m > 0 {
            let dyu = dy.component_mul(&s.e) / s.c;
            let norm = dyu.amax();
            if norm > 1e-12 {
                let atdy = (s.a.transpose() * &dy).component_div(&s.d).amax() / s.c;
                let eps = settings.infeasibility_tol * norm;
                let mut support = 0.0;
                let mut valid = atdy <= eps;
                for i in 0..m {
                    if dyu[i] > eps {
                        if u[i].is_finite() { support += u[i] * dyu[i] } else { valid = false }
                    } else if dyu[i] < -eps {
                        if l[i].is_finite() { support += l[i] * dyu[i] } else { valid = false }
                    }
                }
                if valid && support < -eps {
                    certificate = Some(dyu);
                    break;
                }
            }
        }

        if settings.adaptive_rho_interval > 0 && k % settings.adaptive_rho_interval == 0 && m > 0 {
            let prim_n = (&ax - &z).amax() / ax.amax().max(z.amax()).max(1e-30);
            let dual_n = (&px + &s.q + &aty).amax() / px.amax().max(aty.amax()).max(s.q.amax()).max(1e-30);
            let proposal = (rho * (prim_n / dual_n.max(1e-30)).sqrt()).clamp(1e-6, 1e6);
            if proposal > 5.0 * rho || proposal < 0.2 * rho {
                rho = proposal;
                rho_vec = rho_vector(&kinds, rho);
                chol = factor(&s, settings.sigma, &rho_vec)?;
            }
        }
    }

    let (xu, yu) = unscaled(&x, &y);
    if let Some(cert) = certificate {
        let residuals = problem.kkt_residuals(&xu, &yu);
        return Ok(QpSolution {
            objective: problem.objective(&xu),
            x: xu,
            y: yu,
            status: QpStatus::Infeasible,
            iterations,
            polished: false,
            active_set: Vec::new(),
            residuals,
            certificate: Some(cert),
        });
    }
    if settings.polish {
        if let Some(sol) = polish(problem, &c, &l, &u, &xu, &yu, &s, &z, settings) {
            return Ok(QpSolution { iterations, ..sol });
        }
    }
    let residuals = problem.kkt_residuals(&xu, &yu);
    let status = if converged { QpStatus::Optimal } else { QpStatus::MaxIter };
    let active_set = active_from_duals(&kinds, &s, &z, &y);
    Ok(QpSolution {
        objective: problem.objective(&xu),
        x: xu,
        y: yu,
        status,
        iterations,
        polished: false,
        active_set,
        residuals,
        certificate: None,
    })
}

fn active_from_duals(kinds: &[RowKind], s: &Scaled, z: &DVector<f64>, y: &DVector<f64>) -> Vec<ActiveConstraint> {
    let mut out = Vec::new();
    for i in 0..kinds.len() {
        match kinds[i] {
            RowKind::Equality => out.push(ActiveConstraint::Equality(i)),
            RowKind::Free => {}
            RowKind::Inequality => {
                if z[i] - s.l[i] < -y[i] {
                    out.push(ActiveConstraint::Lower(i));
                } else if s.u[i] - z[i] < y[i] {
                    out.push(ActiveConstraint::Upper(i));
                }
            }
        }
    }
    out
}

/// Equality-constrained KKT solve with the rows in `active` held at their
/// bounds; returns the primal point and the full-length dual vector.
fn solve_active(
    problem: &QpProblem,
    c: &DMatrix<f64>,
    l: &DVector<f64>,
    u: &DVector<f64>,
    active: &[ActiveConstraint],
) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = problem.n_vars();
    let na = active.len();
    let rows: Vec<(usize, f64)> = active
        .iter()
        .map(|a| match *a {
            ActiveConstraint::Equality(i) | ActiveConstraint::Lower(i) => (i, l[i]),
            ActiveConstraint::Upper(i) => (i, u[i]),
        })
        .collect();
    let delta = 1e-9;
    let build = |reg: f64| {
        let mut k = DMatrix::zeros(n + na, n + na);
        k.view_mut((0, 0), (n, n)).copy_from(&problem.h);
        for d in 0..n {
            k[(d, d)] += reg;
        }
        for (r, (i, _)) in rows.iter().enumerate() {
            for j in 0..n {
                k[(n + r, j)] = c[(*i, j)];
                k[(j, n + r)] = c[(*i, j)];
            }
            k[(n + r, n + r)] = -reg;
        }
        k
    };
    let exact = build(0.0);
    let lu = build(delta).lu();
    let mut rhs = DVector::zeros(n + na);
    rhs.rows_mut(0, n).copy_from(&(-&problem.f));
    for (r, (_, b)) in rows.iter().enumerate() {
        rhs[n + r] = *b;
    }
    let mut sol = lu.solve(&rhs)?;
    for _ in 0..5 {
        let res = &rhs - &exact * &sol;
        if res.amax() < 1e-14 {
            break;
        }
        sol += lu.solve(&res)?;
    }
    let x = sol.rows(0, n).into_owned();
    let mut y = DVector::zeros(c.nrows());
    for (r, (i, _)) in rows.iter().enumerate() {
        y[*i] = sol[n + r];
    }
    x.iter().chain(y.iter()).all(|v| v.is_finite()).then_some((x, y))
}

const POLISH_ROUNDS: usize = 8;

/// Starts from the active set suggested by the ADMM iterate and repairs it:
/// rows whose multipliers have the wrong sign are released, violated rows are
/// added, and the KKT system is re-solved. The result is accepted only if it
/// meets the tolerances.
#[allow(clippy::too_many_arguments)]
fn polish(
    problem: &QpProblem,
    c: &DMatrix<f64>,
    l: &DVector<f64>,
    u: &DVector<f64>,
    x_admm: &DVector<f64>,
    y_admm: &DVector<f64>,
    s: &Scaled,
    z_scaled: &DVector<f64>,
    settings: &QpSettings,
) -> Option<QpSolution> {
    let m = c.nrows();
    let kinds: Vec<RowKind> = (0..m).map(|i| row_kind(l[i], u[i])).collect();
    let y_scaled = y_admm.component_div(&s.e) * s.c;
    let mut active = active_from_duals(&kinds, s, z_scaled, &y_scaled);
    let sign_tol = settings.tol_stat.max(1e-12);
    for _ in 0..POLISH_ROUNDS {
        let (x, y) = solve_active(problem, c, l, u, &active)?;
        let mut changed = false;
        let mut in_set = vec![false; m];
        let mut next = Vec::with_capacity(active.len());
        for a in &active {
            match *a {
                ActiveConstraint::Lower(i) if y[i] > sign_tol => changed = true,
                ActiveConstraint::Upper(i) if y[i] < -sign_tol => changed = true,
                ActiveConstraint::Equality(i) | ActiveConstraint::Lower(i) | ActiveConstraint::Upper(i) => {
                    in_set[i] = true;
                    next.push(*a);
                }
            }
        }
        let z = c * &x;
        for i in 0..m {
            if kinds[i] != RowKind::Inequality || in_set[i] {
                continue;
            }
            if z[i] > u[i] + settings.tol_feas {
                next.push(ActiveConstraint::Upper(i));
                changed = true;
            } else if z[i] < l[i] - settings.tol_feas {
                next.push(ActiveConstraint::Lower(i));
                changed = true;
            }
        }
        if changed {
            next.sort_by_key(|a| match *a {
                ActiveConstraint::Equality(i) | ActiveConstraint::Lower(i) | ActiveConstraint::Upper(i) => i,
            });
            active = next;
            continue;
        }
        let residuals = problem.kkt_residuals(&x, &y);
        if residuals.primal > settings.tol_feas || residuals.stationarity > settings.tol_stat {
            return None;
        }
        let admm = problem.kkt_residuals(x_admm, y_admm);
        if residuals.primal > admm.primal.max(settings.tol_feas) {
            return None;
        }
        return Some(QpSolution {
            objective: problem.objective(&x),
            x,
            y,
            status: QpStatus::Optimal,
            iterations: 0,
            polished: true,
            active_set: active,
            residuals,
            certificate: None,
        });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn settings() -> QpSettings {
        QpSettings::default()
    }

    #[test]
    fn unconstrained_scalar() {
        let p = QpProblem::new(DMatrix::from_element(1, 1, 2.0), DVector::from_element(1, -4.0));
        let s = solve_qp(&p, &settings()).unwrap();
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn active_lower_bound() {
        // min x² s.t. x ≥ 1
        let p = QpProblem::new(DMatrix::from_element(1, 1, 2.0), DVector::zeros(1)).with_inequalities(
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DVector::from_element(1, f64::INFINITY),
        );
        let s = solve_qp(&p, &settings()).unwrap();
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-8);
        assert_eq!(s.active_set, vec![ActiveConstraint::Lower(0)]);
        assert!(s.y[0] < 0.0);
    }

    #[test]
    fn two_variable_instance_against_grid() {
        // min ½xᵀHx + fᵀx, x1 + x2 ≤ 1, -1 ≤ x1 - x2 ≤ 0.5, 0 ≤ x
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f = DVector::from_vec(vec![-3.0, -2.0]);
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, 1.0, 0.0, 0.0, 1.0]);
        let lo = DVector::from_vec(vec![f64::NEG_INFINITY, -1.0, 0.0, 0.0]);
        let hi = DVector::from_vec(vec![1.0, 0.5, f64::INFINITY, f64::INFINITY]);
        let p = QpProblem::new(h, f).with_inequalities(a.clone(), lo.clone(), hi.clone());
        let s = solve_qp(&p, &settings()).unwrap();
        assert_eq!(s.status, QpStatus::Optimal);
        let mut best = f64::INFINITY;
        let steps = 2000;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = DVector::from_vec(vec![i as f64 * 1e-3 - 0.5, j as f64 * 1e-3 - 0.5]);
                let z = &a * &x;
                if (0..4).all(|k| z[k] >= lo[k] - 1e-12 && z[k] <= hi[k] + 1e-12) {
                    best = best.min(p.objective(&x));
                }
            }
        }
        assert!(s.objective <= best + 1e-9);
        assert!((s.objective - best).abs() < 1e-4, "{} vs grid {}", s.objective, best);
    }

    #[test]
    fn detects_infeasibility() {
        // x ≥ 1 and x ≤ -1 written as two rows
        let p = QpProblem::new(DMatrix::from_element(1, 1, 1.0), DVector::zeros(1)).with_inequalities(
            DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            DVector::from_vec(vec![1.0, f64::NEG_INFINITY]),
            DVector::from_vec(vec![f64::INFINITY, -1.0]),
        );
        let s = solve_qp(&p, &settings()).unwrap();
        assert_eq!(s.status, QpStatus::Infeasible);
        assert!(s.certificate.is_some());
    }

    #[test]
    fn equality_constrained_least_norm() {
        // min ½|x|² s.t. x1 + x2 + x3 = 3 → x = (1,1,1)
        let p = QpProblem::new(DMatrix::identity(3, 3), DVector::zeros(3))
            .with_equalities(DMatrix::from_element(1, 3, 1.0), DVector::from_element(1, 3.0));
        let s = solve_qp(&p, &settings()).unwrap();
        assert!((s.x.clone() - DVector::from_element(3, 1.0)).amax() < 1e-9);
        assert!((s.y[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_problems_satisfy_kkt_and_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = 8;
            let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let h = &r * r.transpose() * 0.5 + DMatrix::identity(n, n) * 1e-3;
            let f = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
            let ae = DMatrix::from_fn(2, n, |_, _| rng.random_range(-1.0..1.0));
            let be = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let ai = DMatrix::identity(n, n);
            let lo = DVector::from_element(n, -1.0);
            let hi = DVector::from_element(n, 1.0);
            let p = QpProblem::new(h, f).with_equalities(ae, be).with_inequalities(ai, lo, hi);
            let st = settings();
            let a = solve_qp(&p, &st).unwrap();
            if a.status != QpStatus::Optimal {
                continue;
            }
            let kkt = p.kkt_residuals(&a.x, &a.y);
            assert!(kkt.primal <= 10.0 * st.tol_feas);
            assert!(kkt.stationarity <= 10.0 * st.tol_stat);
            let b = solve_qp(&p, &st).unwrap();
            assert_eq!(a.x, b.x);
            // warm start on the same problem reproduces the objective
            let w = solve_qp_warm(&p, &st, Some((&a.x, &a.y))).unwrap();
            assert!((w.objective - a.objective).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        let p = QpProblem::new(DMatrix::identity(2, 2), DVector::zeros(3));
        assert!(matches!(solve_qp(&p, &settings()), Err(Error::Dimension(_))));
    }
}
