use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Matrix6, Vector3, Vector6};

use super::spatial::{crf, crm, plucker, spatial_inertia};
use crate::arm::{rot_x, rot_y, ArmGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    RevoluteX,
    RevoluteY,
    PrismaticZ,
}

impl JointKind {
    fn motion_subspace(self) -> Vector6<f64> {
        match self {
            JointKind::RevoluteX => Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
            JointKind::RevoluteY => Vector6::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0),
            JointKind::PrismaticZ => Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0),
        }
    }

    /// Rotation and translation of the child frame relative to the parent.
    fn local_motion(self, value: f64) -> (Matrix3<f64>, Vector3<f64>) {
        match self {
            JointKind::RevoluteX => (rot_x(value), Vector3::zeros()),
            JointKind::RevoluteY => (rot_y(value), Vector3::zeros()),
            JointKind::PrismaticZ => (Matrix3::identity(), Vector3::new(0.0, 0.0, value)),
        }
    }
}

#[derive(Debug, Clone)]
struct Body {
    joint: JointKind,
    /// Fixed offset from the parent body frame to this joint, parent frame.
    offset: Vector3<f64>,
    mass: f64,
    com: Vector3<f64>,
    inertia: Matrix6<f64>,
}

/// Serial rigid chain equivalent to the PCC arm, five joints per section:
/// `RotY, RotX, Prismatic(z), RotY, RotX`, with each segment's connector as a
/// fixed offset (and point mass) after its last section.
///
/// Each section's mass sits on the body after the prismatic joint, at half the
/// rest length behind the joint frame, with the inertia of a solid rod.
#[derive(Debug, Clone)]
pub struct AugmentedChain {
    bodies: Vec<Body>,
    tip_offset: Vector3<f64>,
    gravity: Vector3<f64>,
    base_frame: Isometry3<f64>,
}

/// Joint-space inertia, velocity bias and gravity vectors.
#[derive(Debug, Clone)]
pub struct JointSpaceTerms {
    pub inertia: DMatrix<f64>,
    pub coriolis: DVector<f64>,
    pub gravity: DVector<f64>,
}

impl AugmentedChain {
    pub fn from_geometry(geom: &ArmGeometry) -> Self {
        let mut bodies = Vec::with_capacity(5 * geom.n_sections());
        let mut pending_offset = Vector3::zeros();
        let r = geom.segment_radius;
        for seg in 0..geom.n_segments {
            for sec in 0..geom.pcc_per_segment {
                let idx = seg * geom.pcc_per_segment + sec;
                let l = geom.section_rest_length(idx);
                let m = geom.section_mass(idx);
                let rod = Matrix3::from_diagonal(&Vector3::new(
                    m * (3.0 * r * r + l * l) / 12.0,
                    m * (3.0 * r * r + l * l) / 12.0,
                    0.5 * m * r * r,
                ));
                let last = sec + 1 == geom.pcc_per_segment;
                let empty = |joint, offset| Body {
                    joint,
                    offset,
                    mass: 0.0,
                    com: Vector3::zeros(),
                    inertia: Matrix6::zeros(),
                };
                bodies.push(empty(JointKind::RevoluteY, pending_offset));
                bodies.push(empty(JointKind::RevoluteX, Vector3::zeros()));
                let com = Vector3::new(0.0, 0.0, -0.5 * l);
                bodies.push(Body {
                    joint: JointKind::PrismaticZ,
                    offset: Vector3::zeros(),
                    mass: m,
                    com,
                    inertia: spatial_inertia(m, &com, &rod),
                });
                bodies.push(empty(JointKind::RevoluteY, Vector3::zeros()));
                if last {
                    let mc = geom.connector_mass[seg];
                    let c = geom.connector_offset[seg];
                    bodies.push(Body {
                        joint: JointKind::RevoluteX,
                        offset: Vector3::zeros(),
                        mass: mc,
                        com: c,
                        inertia: spatial_inertia(mc, &c, &Matrix3::zeros()),
                    });
                    pending_offset = c;
                } else {
                    bodies.push(empty(JointKind::RevoluteX, Vector3::zeros()));
                    pending_offset = Vector3::zeros();
                }
            }
        }
        AugmentedChain {
            bodies,
            tip_offset: pending_offset,
            gravity: geom.gravity_in_base(),
            base_frame: geom.base_frame,
        }
    }

    pub fn n_joints(&self) -> usize {
        self.bodies.len()
    }

    pub fn joint_kinds(&self) -> Vec<JointKind> {
        self.bodies.iter().map(|b| b.joint).collect()
    }

    /// Parent-to-child Plücker transforms for joint values `xi`.
    fn transforms(&self, xi: &DVector<f64>) -> Vec<Matrix6<f64>> {
        self.bodies
            .iter()
            .zip(xi.iter())
            .map(|(b, &v)| {
                let (rot, trans) = b.joint.local_motion(v);
                plucker(&rot.transpose(), &(b.offset + trans))
            })
            .collect()
    }

    /// Base-frame pose of every body frame.
    fn body_frames(&self, xi: &DVector<f64>) -> Vec<(Matrix3<f64>, Vector3<f64>)> {
        let mut rot = Matrix3::identity();
        let mut pos = Vector3::zeros();
        self.bodies
            .iter()
            .zip(xi.iter())
            .map(|(b, &v)| {
                pos += rot * b.offset;
                let (r, t) = b.joint.local_motion(v);
                pos += rot * t;
                rot *= r;
                (rot, pos)
            })
            .collect()
    }

    /// Tip position in the world frame, computed along the joint chain.
    pub fn tip_position(&self, xi: &DVector<f64>) -> Vector3<f64> {
        let frames = self.body_frames(xi);
        let (rot, pos) = frames.last().copied().unwrap_or((Matrix3::identity(), Vector3::zeros()));
        let tip = pos + rot * self.tip_offset;
        self.base_frame.transform_point(&tip.into()).coords
    }

    /// Gravitational potential energy `-Σ m gᵀ p_com`.
    pub fn potential_energy(&self, xi: &DVector<f64>) -> f64 {
        self.body_frames(xi)
            .iter()
            .zip(&self.bodies)
            .map(|((rot, pos), b)| -b.mass * self.gravity.dot(&(pos + rot * b.com)))
            .sum()
    }

    /// Recursive Newton-Euler inverse dynamics, optionally without gravity.
    pub fn inverse_dynamics(
        &self,
        xi: &DVector<f64>,
        xid: &DVector<f64>,
        xidd: &DVector<f64>,
        with_gravity: bool,
    ) -> DVector<f64> {
        let n = self.n_joints();
        let x = self.transforms(xi);
        let mut vel = vec![Vector6::zeros(); n];
        let mut acc = vec![Vector6::zeros(); n];
        let mut force = vec![Vector6::zeros(); n];
        let g = if with_gravity { self.gravity } else { Vector3::zeros() };
        let a0 = Vector6::new(0.0, 0.0, 0.0, -g.x, -g.y, -g.z);
        for i in 0..n {
            let s = self.bodies[i].joint.motion_subspace();
            let (vp, ap) = if i == 0 { (Vector6::zeros(), a0) } else { (vel[i - 1], acc[i - 1]) };
            vel[i] = x[i] * vp + s * xid[i];
            acc[i] = x[i] * ap + s * xidd[i] + crm(&vel[i]) * s * xid[i];
            let inertia = &self.bodies[i].inertia;
            force[i] = inertia * acc[i] + crf(&vel[i]) * (inertia * vel[i]);
        }
        let mut tau = DVector::zeros(n);
        for i in (0..n).rev() {
            tau[i] = self.bodies[i].joint.motion_subspace().dot(&force[i]);
            if i > 0 {
                let f = x[i].transpose() * force[i];
                force[i - 1] += f;
            }
        }
        tau
    }

    /// Composite-rigid-body joint-space inertia matrix.
    pub fn mass_matrix(&self, xi: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n_joints();
        let x = self.transforms(xi);
        let mut composite: Vec<Matrix6<f64>> = self.bodies.iter().map(|b| b.inertia).collect();
        for i in (1..n).rev() {
            let c = x[i].transpose() * composite[i] * x[i];
            composite[i - 1] += c;
        }
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let si = self.bodies[i].joint.motion_subspace();
            let mut f = composite[i] * si;
            h[(i, i)] = si.dot(&f);
            let mut j = i;
            while j > 0 {
                f = x[j].transpose() * f;
                j -= 1;
                let v = self.bodies[j].joint.motion_subspace().dot(&f);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    /// Inertia via CRBA, gravity via RNEA at rest, and the velocity bias via
    /// RNEA at zero acceleration minus gravity.
    pub fn joint_space_terms(&self, xi: &DVector<f64>, xid: &DVector<f64>) -> JointSpaceTerms {
        let zero = DVector::zeros(self.n_joints());
        let gravity = self.inverse_dynamics(xi, &zero, &zero, true);
        let coriolis = self.inverse_dynamics(xi, xid, &zero, false);
        JointSpaceTerms { inertia: self.mass_matrix(xi), coriolis, gravity }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_xi(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            if i % 5 == 2 {
                rng.random_range(0.08..0.125)
            } else {
                rng.random_range(-0.8..0.8)
            }
        })
    }

    #[test]
    fn layout_has_five_joints_per_section() {
        let chain = AugmentedChain::from_geometry(&ArmGeometry::default());
        assert_eq!(chain.n_joints(), 10);
        use JointKind::*;
        assert_eq!(
            chain.joint_kinds()[..5],
            [RevoluteY, RevoluteX, PrismaticZ, RevoluteY, RevoluteX]
        );
    }

    #[test]
    fn coriolis_vanishes_at_rest_and_is_quadratic() {
        let chain = AugmentedChain::from_geometry(&ArmGeometry::default());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xi = random_xi(&mut rng, 10);
        let xid = DVector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
        let t0 = chain.joint_space_terms(&xi, &DVector::zeros(10));
        assert!(t0.coriolis.amax() == 0.0);
        let t1 = chain.joint_space_terms(&xi, &xid);
        let t2 = chain.joint_space_terms(&xi, &(&xid * 2.0));
        assert!((&t2.coriolis - &t1.coriolis * 4.0).amax() < 1e-12 * t1.coriolis.amax().max(1.0));
    }

    #[test]
    fn mass_matrix_is_symmetric_positive_definite() {
        let chain = AugmentedChain::from_geometry(&ArmGeometry::default());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let xi = random_xi(&mut rng, 10);
            let h = chain.mass_matrix(&xi);
            assert!((&h - h.transpose()).amax() < 1e-15);
            let min = h.symmetric_eigenvalues().min();
            assert!(min > 0.0, "min eigenvalue {min}");
        }
    }

    #[test]
    fn mass_matrix_agrees_with_unit_acceleration_rnea() {
        // H e_j = ID(ξ, 0, e_j) without gravity
        let chain = AugmentedChain::from_geometry(&ArmGeometry::default());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi = random_xi(&mut rng, 10);
        let h = chain.mass_matrix(&xi);
        let zero = DVector::zeros(10);
        for j in 0..10 {
            let mut e = DVector::zeros(10);
            e[j] = 1.0;
            let col = chain.inverse_dynamics(&xi, &zero, &e, false);
            assert!((col - h.column(j)).amax() < 1e-14);
        }
    }

    #[test]
    fn gravity_is_potential_gradient() {
        let chain = AugmentedChain::from_geometry(&ArmGeometry::default());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xi = random_xi(&mut rng, 10);
        let g = chain.joint_space_terms(&xi, &DVector::zeros(10)).gravity;
        let h = 1e-6;
        for j in 0..10 {
            let mut p = xi.clone();
            p[j] += h;
            let mut m = xi.clone();
            m[j] -= h;
            let fd = (chain.potential_energy(&p) - chain.potential_energy(&m)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-8, "joint {j}: {fd} vs {}", g[j]);
        }
    }
}
