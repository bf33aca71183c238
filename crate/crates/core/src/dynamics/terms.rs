use nalgebra::{DMatrix, DVector};

use super::chain::{AugmentedChain, JointSpaceTerms};
use super::mapping::{map_to_augmented, mapping_jacobian, mapping_jacobian_dot_qd};
use crate::arm::{ArmGeometry, PseudoPressure};
use crate::error::{Error, Result};

/// Linear spring, damper and pressure allocation of the soft arm.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsParams {
    /// `K`, q_size × q_size.
    pub stiffness: DMatrix<f64>,
    /// `D`, q_size × q_size.
    pub damping: DMatrix<f64>,
    /// `A`, q_size × (2 · n_segments).
    pub allocation: DMatrix<f64>,
    /// Inertia matrices with a larger condition number are rejected.
    pub max_condition: f64,
}

impl DynamicsParams {
    /// Diagonal `K = k·I`, `D = d·I`; each segment's pseudo-pressure pair
    /// drives the `(θx, θy)` pairs of its sections with gain `moment_arm[s]`.
    pub fn new(geom: &ArmGeometry, stiffness: f64, damping: f64, moment_arm: &[f64]) -> Self {
        let n = geom.q_size();
        let mut allocation = DMatrix::zeros(n, geom.n_inputs());
        for s in 0..geom.n_sections() {
            let seg = s / geom.pcc_per_segment;
            allocation[(2 * s, 2 * seg)] = moment_arm[seg];
            allocation[(2 * s + 1, 2 * seg + 1)] = moment_arm[seg];
        }
        DynamicsParams {
            stiffness: DMatrix::identity(n, n) * stiffness,
            damping: DMatrix::identity(n, n) * damping,
            allocation,
            max_condition: 1e10,
        }
    }

    pub fn with_stiffness_scale(&self, factor: f64) -> Self {
        DynamicsParams { stiffness: &self.stiffness * factor, ..self.clone() }
    }
}

/// Curvature-space terms of `A p + Jᵀf = B q̈ + c + g + K q + D q̇`.
#[derive(Debug, Clone)]
pub struct DynamicsTerms {
    pub inertia: DMatrix<f64>,
    pub coriolis: DVector<f64>,
    pub gravity: DVector<f64>,
    pub stiffness: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    pub allocation: DMatrix<f64>,
    /// Generalized external force `Jᵀf`; always zero in this model.
    pub external: DVector<f64>,
}

/// Joint-space terms of the augmented chain at `(ξ, ξ̇)`.
pub fn joint_space_terms(xi: &DVector<f64>, xid: &DVector<f64>, chain: &AugmentedChain) -> JointSpaceTerms {
    chain.joint_space_terms(xi, xid)
}

/// Pulls the chain terms back to curvature space:
/// `B = J_mᵀ B_ξ J_m`, `g = J_mᵀ g_ξ`, `c = J_mᵀ (c_ξ + B_ξ J̇_m q̇)`.
pub fn dynamics_terms(
    q: &DVector<f64>,
    qd: &DVector<f64>,
    geom: &ArmGeometry,
    params: &DynamicsParams,
) -> Result<DynamicsTerms> {
    let n = geom.q_size();
    if q.len() != n || qd.len() != n {
        return Err(Error::Dimension(format!("state must have {n} entries per vector")));
    }
    if !q.iter().chain(qd.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput("dynamics_terms"));
    }
    let chain = AugmentedChain::from_geometry(geom);
    let xi = map_to_augmented(q, geom);
    let jm = mapping_jacobian(q, geom);
    let xid = &jm * qd;
    let js = chain.joint_space_terms(&xi, &xid);
    let jmt = jm.transpose();
    let mut inertia = &jmt * &js.inertia * &jm;
    inertia = (&inertia + inertia.transpose()) * 0.5;
    let convective = &js.inertia * mapping_jacobian_dot_qd(q, qd, geom);
    let coriolis = &jmt * (js.coriolis + convective);
    let gravity = &jmt * js.gravity;

    let eig = inertia.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 0.0) || hi / lo > params.max_condition {
        return Err(Error::SingularInertia(if lo > 0.0 { hi / lo } else { f64::INFINITY }));
    }
    Ok(DynamicsTerms {
        inertia,
        coriolis,
        gravity,
        stiffness: params.stiffness.clone(),
        damping: params.damping.clone(),
        allocation: params.allocation.clone(),
        external: DVector::zeros(n),
    })
}

/// `q̈ = B⁻¹ (A p + Jᵀf − c − g − K q − D q̇)`.
pub fn plant_accel(
    q: &DVector<f64>,
    qd: &DVector<f64>,
    p: &PseudoPressure,
    terms: &DynamicsTerms,
) -> Result<DVector<f64>> {
    let rhs = &terms.allocation * &p.0 + &terms.external
        - &terms.coriolis
        - &terms.gravity
        - &terms.stiffness * q
        - &terms.damping * qd;
    let chol = terms
        .inertia
        .clone()
        .cholesky()
        .ok_or(Error::SingularInertia(f64::INFINITY))?;
    let qdd = chol.solve(&rhs);
    if !qdd.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("plant_accel"));
    }
    Ok(qdd)
}

/// Energy components of the passive arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub elastic: f64,
    pub gravitational: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.elastic + self.gravitational
    }
}

pub fn mechanical_energy(
    q: &DVector<f64>,
    qd: &DVector<f64>,
    geom: &ArmGeometry,
    params: &DynamicsParams,
) -> Energy {
    let chain = AugmentedChain::from_geometry(geom);
    let xi = map_to_augmented(q, geom);
    let xid = mapping_jacobian(q, geom) * qd;
    Energy {
        kinetic: 0.5 * xid.dot(&(chain.mass_matrix(&xi) * &xid)),
        elastic: 0.5 * q.dot(&(&params.stiffness * q)),
        gravitational: chain.potential_energy(&xi),
    }
}
