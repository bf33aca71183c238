//! Sequential quadratic programming over a model that can be re-linearized
//! about any iterate. Constraints are linear in the decision vector, so every
//! point on a segment between feasible iterates stays feasible and the line
//! search only has to watch the true cost.

use nalgebra::DVector;

use super::qp::{solve_qp_warm, QpProblem, QpSettings, QpSolution, QpStatus};
use crate::error::{Error, Result};

/// Local quadratic model: `½vᵀHv + fᵀv + constant` approximates the true cost
/// near the linearization point.
#[derive(Debug, Clone)]
pub struct LocalQp {
    pub qp: QpProblem,
    pub constant: f64,
    /// Constraint family name per stacked row (equalities first), used in
    /// infeasibility diagnostics. May be empty.
    pub row_families: Vec<&'static str>,
}

pub trait SqpModel {
    fn n_vars(&self) -> usize;
    /// Quadratic model about `v`. On the first outer iteration `first` is set,
    /// letting the model use externally supplied linearization points.
    fn local_qp(&self, v: &DVector<f64>, first: bool) -> Result<LocalQp>;
    fn true_cost(&self, v: &DVector<f64>) -> Result<f64>;
}

#[derive(Debug, Clone)]
pub struct SqpSettings {
    pub max_outer: usize,
    /// Relative cost decrease below which the outer loop stops.
    pub tol: f64,
    pub max_halvings: usize,
    pub qp: QpSettings,
}

impl Default for SqpSettings {
    fn default() -> Self {
        SqpSettings { max_outer: 6, tol: 1e-6, max_halvings: 8, qp: QpSettings::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqpStatus {
    Converged,
    MaxOuter,
    /// The line search could not decrease the true cost along the last step.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct SqpResult {
    pub v: DVector<f64>,
    pub cost: f64,
    pub status: SqpStatus,
    pub outer_iterations: usize,
    pub qp_iterations: usize,
    /// Worst QP status met along the way (`MaxIter` if any subproblem hit the cap).
    pub qp_status: QpStatus,
    /// True cost after every accepted step.
    pub cost_history: Vec<f64>,
    pub last_qp: QpSolution,
}

fn solve_local(local: &LocalQp, warm: Option<(&DVector<f64>, &DVector<f64>)>, settings: &SqpSettings) -> Result<QpSolution> {
    let sol = solve_qp_warm(&local.qp, &settings.qp, warm)?;
    match sol.status {
        QpStatus::Infeasible => {
            let cert = sol.certificate.as_ref().expect("infeasible solutions carry a certificate");
            let scale = cert.amax();
            let mut families: Vec<&str> = Vec::new();
            for (i, v) in cert.iter().enumerate() {
                if v.abs() > 1e-6 * scale {
                    let name = local.row_families.get(i).copied().unwrap_or("constraint");
                    if !families.contains(&name) {
                        families.push(name);
                    }
                }
            }
            Err(Error::Infeasible(format!("conflicting constraint families: {}", families.join(", "))))
        }
        QpStatus::MaxIter if sol.residuals.primal > 1e3 * settings.qp.tol_feas.max(1e-9) => Err(Error::MaxIter(sol.iterations)),
        _ => Ok(sol),
    }
}

/// Runs the outer loop from `v0`. The first QP step is taken in full (the
/// start need not be feasible); later steps are halved until the true cost
/// does not increase. Returns the best feasible iterate.
pub fn sqp_solve(model: &dyn SqpModel, v0: &DVector<f64>, settings: &SqpSettings) -> Result<SqpResult> {
    if v0.len() != model.n_vars() {
        return Err(Error::Dimension(format!("SQP start has {} entries, model has {}", v0.len(), model.n_vars())));
    }
    let local = model.local_qp(v0, true)?;
    let first = solve_local(&local, None, settings)?;
    let mut qp_iterations = first.iterations;
    let mut qp_status = first.status;
    let mut v = first.x.clone();
    let mut cost = model.true_cost(&v)?;
    let mut model_cost = first.objective + local.constant;
    let mut cost_history = vec![cost];
    let mut last_qp = first;
    let mut outer = 1;
    let mut status = SqpStatus::MaxOuter;

    loop {
        if (cost - model_cost).abs() <= settings.tol * cost.abs().max(1.0) {
            status = SqpStatus::Converged;
            break;
        }
        if outer >= settings.max_outer {
            break;
        }
        let local = model.local_qp(&v, false)?;
        let sol = solve_local(&local, Some((&v, &last_qp.y)), settings)?;
        outer += 1;
        qp_iterations += sol.iterations;
        if sol.status == QpStatus::MaxIter {
            qp_status = QpStatus::MaxIter;
        }
        let step = &sol.x - &v;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let trial = &v + &step * alpha;
            let c = model.true_cost(&trial)?;
            if c <= cost {
                accepted = Some((trial, c));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, c)) = accepted else {
            status = SqpStatus::Stalled;
            break;
        };
        let decrease = cost - c;
        v = trial;
        cost = c;
        cost_history.push(c);
        model_cost = if alpha == 1.0 { sol.objective + local.constant } else { f64::NAN };
        last_qp = sol;
        if decrease <= settings.tol * cost.abs().max(1.0) {
            status = SqpStatus::Converged;
            break;
        }
    }
    Ok(SqpResult { v, cost, status, outer_iterations: outer, qp_iterations, qp_status, cost_history, last_qp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::solve_qp;
    use nalgebra::DMatrix;

    /// min ½|x − t|² + ½w·(x₀² + x₁² − 1)² style toy, linearized Gauss-Newton.
    struct Circle {
        target: DVector<f64>,
        weight: f64,
        nonlinear: bool,
    }

    impl Circle {
        fn residual(&self, v: &DVector<f64>) -> f64 {
            if self.nonlinear {
                v[0] * v[0] + v[1] * v[1] - 1.0
            } else {
                v[0] + 2.0 * v[1] - 1.0
            }
        }
        fn grad(&self, v: &DVector<f64>) -> DVector<f64> {
            if self.nonlinear {
                DVector::from_vec(vec![2.0 * v[0], 2.0 * v[1]])
            } else {
                DVector::from_vec(vec![1.0, 2.0])
            }
        }
    }

    impl SqpModel for Circle {
        fn n_vars(&self) -> usize {
            2
        }
        fn local_qp(&self, v: &DVector<f64>, _first: bool) -> Result<LocalQp> {
            // residual r(v) ≈ r̄ + gᵀ(x − v) = gᵀx + (r̄ − gᵀv)
            let g = self.grad(v);
            let r0 = self.residual(v) - g.dot(v);
            let h = DMatrix::identity(2, 2) + &g * g.transpose() * self.weight;
            let f = -&self.target + &g * (self.weight * r0);
            let constant = 0.5 * self.target.norm_squared() + 0.5 * self.weight * r0 * r0;
            let qp = QpProblem::new(h, f).with_inequalities(
                DMatrix::identity(2, 2),
                DVector::from_element(2, -0.9),
                DVector::from_element(2, 0.9),
            );
            Ok(LocalQp { qp, constant, row_families: vec!["box", "box"] })
        }
        fn true_cost(&self, v: &DVector<f64>) -> Result<f64> {
            let r = self.residual(v);
            Ok(0.5 * (v - &self.target).norm_squared() + 0.5 * self.weight * r * r)
        }
    }

    #[test]
    fn linear_model_converges_in_one_iteration() {
        let m = Circle { target: DVector::from_vec(vec![0.3, -0.2]), weight: 10.0, nonlinear: false };
        let v0 = DVector::zeros(2);
        let r = sqp_solve(&m, &v0, &SqpSettings::default()).unwrap();
        assert_eq!(r.outer_iterations, 1);
        assert_eq!(r.status, SqpStatus::Converged);
        let direct = solve_qp(&m.local_qp(&v0, true).unwrap().qp, &QpSettings::default()).unwrap();
        assert_eq!(r.v, direct.x);
    }

    #[test]
    fn nonlinear_cost_is_monotone() {
        let m = Circle { target: DVector::from_vec(vec![1.5, 0.4]), weight: 50.0, nonlinear: true };
        let settings = SqpSettings { max_outer: 30, ..SqpSettings::default() };
        let r = sqp_solve(&m, &DVector::from_vec(vec![0.1, 0.1]), &settings).unwrap();
        for w in r.cost_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(r.outer_iterations > 1);
        assert!(r.v.iter().all(|x| x.abs() <= 0.9 + 1e-7));
        // near the unit circle, pushed toward the target
        assert!((r.v.norm() - 1.0).abs() < 0.1);
    }

    #[test]
    fn bit_identical_resolves() {
        let m = Circle { target: DVector::from_vec(vec![0.2, 0.9]), weight: 20.0, nonlinear: true };
        let v0 = DVector::from_vec(vec![0.5, 0.0]);
        let a = sqp_solve(&m, &v0, &SqpSettings::default()).unwrap();
        let b = sqp_solve(&m, &v0, &SqpSettings::default()).unwrap();
        assert_eq!(a.v, b.v);
        assert_eq!(a.cost.to_bits(), b.cost.to_bits());
    }

    #[test]
    fn infeasibility_names_the_family() {
        struct Bad;
        impl SqpModel for Bad {
            fn n_vars(&self) -> usize {
                1
            }
            fn local_qp(&self, _: &DVector<f64>, _: bool) -> Result<LocalQp> {
                let qp = QpProblem::new(DMatrix::identity(1, 1), DVector::zeros(1)).with_inequalities(
                    DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
                    DVector::from_vec(vec![1.0, f64::NEG_INFINITY]),
                    DVector::from_vec(vec![f64::INFINITY, 0.0]),
                );
                Ok(LocalQp { qp, constant: 0.0, row_families: vec!["input bound", "input slew"] })
            }
            fn true_cost(&self, v: &DVector<f64>) -> Result<f64> {
                Ok(v[0] * v[0])
            }
        }
        match sqp_solve(&Bad, &DVector::zeros(1), &SqpSettings::default()) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("input bound") && msg.contains("input slew"), "{msg}"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
