//! Quasi-static baseline: damped inverse-kinematics increments converted to
//! pressures through the static force balance, with no dynamic prediction.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::arm::{ArmGeometry, PseudoPressure, TaskMap};
use crate::dynamics::{dynamics_terms, DynamicsParams};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiStaticGains {
    /// Fraction of the inverse-kinematics step taken per control loop.
    pub gain: f64,
    /// Damping `λ` of the pseudo-inverse `Jᵀ(JJᵀ + λ²I)⁻¹`.
    pub damping: f64,
}

impl Default for QuasiStaticGains {
    fn default() -> Self {
        QuasiStaticGains { gain: 0.5, damping: 0.01 }
    }
}

/// `Jᵀ(JJᵀ + λ²I)⁻¹ e`.
pub fn damped_pseudo_inverse_step(j: &DMatrix<f64>, e: &Vector3<f64>, damping: f64) -> DVector<f64> {
    let jjt = j * j.transpose() + DMatrix::identity(3, 3) * (damping * damping);
    let m = Matrix3::from_iterator(jjt.iter().copied());
    let w = m.try_inverse().unwrap_or_else(Matrix3::zeros) * e;
    j.transpose() * DVector::from_column_slice(w.as_slice())
}

/// Least-squares pressure holding `q` at rest: `A p = K q + g(q)`, clipped.
pub fn static_pressure(
    q: &DVector<f64>,
    geom: &ArmGeometry,
    params: &DynamicsParams,
    p_min: &DVector<f64>,
    p_max: &DVector<f64>,
) -> Result<PseudoPressure> {
    let terms = dynamics_terms(q, &DVector::zeros(q.len()), geom, params)?;
    let rhs = &params.stiffness * q + terms.gravity;
    let svd = params.allocation.clone().svd(true, true);
    let p = svd.solve(&rhs, 1e-12).expect("SVD computed with both factors");
    Ok(PseudoPressure(DVector::from_fn(p.len(), |i, _| p[i].clamp(p_min[i], p_max[i]))))
}

/// One baseline update from the measured curvature toward `target`.
#[allow(clippy::too_many_arguments)]
pub fn quasi_static_step(
    q: &DVector<f64>,
    target: &Vector3<f64>,
    gains: QuasiStaticGains,
    task: &dyn TaskMap,
    geom: &ArmGeometry,
    params: &DynamicsParams,
    p_min: &DVector<f64>,
    p_max: &DVector<f64>,
) -> Result<PseudoPressure> {
    let j = task.jacobian(q);
    let j = DMatrix::from_column_slice(3, q.len(), j.as_slice());
    let err = target - task.position(q);
    let dq = damped_pseudo_inverse_step(&j, &err, gains.damping) * gains.gain;
    static_pressure(&(q + dq), geom, params, p_min, p_max)
}

/// Levenberg-Marquardt iterations on the end-effector map starting from `q0`:
/// a step is kept only if it lowers the error, and the damping adapts.
pub fn inverse_kinematics(target: &Vector3<f64>, q0: &DVector<f64>, task: &dyn TaskMap, iterations: usize) -> DVector<f64> {
    let mut q = q0.clone();
    let mut err = target - task.position(&q);
    let mut damping = 1e-2;
    for _ in 0..iterations {
        if err.norm() < 1e-12 {
            break;
        }
        let j = task.jacobian(&q);
        let j = DMatrix::from_column_slice(3, q.len(), j.as_slice());
        let trial = &q + damped_pseudo_inverse_step(&j, &err, damping);
        let trial_err = target - task.position(&trial);
        if trial_err.norm() < err.norm() {
            q = trial;
            err = trial_err;
            damping = (damping * 0.3).max(1e-8);
        } else {
            damping *= 10.0;
            if damping > 1e6 {
                break;
            }
        }
    }
    q
}
