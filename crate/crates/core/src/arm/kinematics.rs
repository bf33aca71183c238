use nalgebra::{DVector, Matrix3, Matrix3xX, Vector3};

use super::ArmGeometry;
use crate::error::{Error, Result};

/// Below this bending angle the chord length switches to its series form.
pub const CHORD_SERIES_EPS: f64 = 1e-6;

/// Central-difference step of [`fk_jacobian`], radians.
pub const FK_JACOBIAN_STEP: f64 = 1e-6;

/// `(θ, φ)` → `(θx, θy)`.
pub fn theta_phi_to_xy(theta: f64, phi: f64) -> (f64, f64) {
    (theta * phi.cos(), theta * phi.sin())
}

/// Polar form of one section's curvature pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCurvature {
    pub theta: f64,
    pub phi: f64,
    /// Set for the straight configuration, where `phi` is 0 by convention.
    pub singular: bool,
}

/// `(θx, θy)` → `(θ, φ)`; `φ = 0` when `θ = 0`.
pub fn xy_to_theta_phi(theta_x: f64, theta_y: f64) -> PolarCurvature {
    let theta = theta_x.hypot(theta_y);
    if theta == 0.0 {
        PolarCurvature { theta: 0.0, phi: 0.0, singular: true }
    } else {
        PolarCurvature { theta, phi: theta_y.atan2(theta_x), singular: false }
    }
}

/// Distance between the endpoints of a circular arc of length `l0` bent by `θ`.
pub fn chord_length(theta: f64, l0: f64) -> f64 {
    if theta.abs() <= CHORD_SERIES_EPS {
        l0 * (1.0 - theta * theta / 24.0)
    } else {
        2.0 * l0 * (0.5 * theta).sin() / theta
    }
}

/// Length used for the straight link of each section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentLength {
    /// Rest length times a constant factor (cheap online approximation).
    Scaled(f64),
    /// Exact chord of the bent arc.
    Chord,
}

impl Default for SegmentLength {
    fn default() -> Self {
        SegmentLength::Scaled(1.0)
    }
}

impl SegmentLength {
    fn length(self, theta: f64, l0: f64) -> f64 {
        match self {
            SegmentLength::Scaled(s) => s * l0,
            SegmentLength::Chord => chord_length(theta, l0),
        }
    }
}

/// End-effector position plus the three motion-capture markers
/// (base, middle connector, tip), world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EePose {
    pub position: Vector3<f64>,
    pub marker_positions: [Vector3<f64>; 3],
}

pub(crate) fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub(crate) fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

struct Walk {
    tip: Vector3<f64>,
    mid: Vector3<f64>,
    chord_midpoints: Vec<Vector3<f64>>,
}

/// Accumulates the rotation chain: half rotation, section link, half rotation,
/// then the connector at the end of each segment. Base-frame coordinates.
fn walk(q: &[f64], geom: &ArmGeometry, length: SegmentLength, with_probes: bool) -> Walk {
    let mut rot = Matrix3::identity();
    let mut pos = Vector3::zeros();
    let mut mid = None;
    let mut chord_midpoints = Vec::new();
    let mid_segment = (geom.n_segments / 2).max(1) - 1;
    for seg in 0..geom.n_segments {
        for sec in 0..geom.pcc_per_segment {
            let idx = seg * geom.pcc_per_segment + sec;
            let (tx, ty) = (q[2 * idx], q[2 * idx + 1]);
            let half = rot_y(-0.5 * tx) * rot_x(-0.5 * ty);
            rot *= half;
            let link = length.length(tx.hypot(ty), geom.section_rest_length(idx));
            let axis = rot.column(2).into_owned();
            if with_probes {
                chord_midpoints.push(pos + axis * (0.5 * link));
            }
            pos += axis * link;
            rot *= half;
        }
        pos += rot * geom.connector_offset[seg];
        if seg == mid_segment {
            mid = Some(pos);
        }
    }
    Walk { tip: pos, mid: mid.unwrap_or(pos), chord_midpoints }
}

fn check_q(q: &DVector<f64>, geom: &ArmGeometry) -> Result<()> {
    if q.len() != geom.q_size() {
        return Err(Error::Dimension(format!(
            "curvature has {} entries, geometry needs {}",
            q.len(),
            geom.q_size()
        )));
    }
    if !q.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput("forward_kinematics"));
    }
    Ok(())
}

/// End-effector pose for curvature `q`.
pub fn forward_kinematics(q: &DVector<f64>, geom: &ArmGeometry, length: SegmentLength) -> Result<EePose> {
    check_q(q, geom)?;
    let w = walk(q.as_slice(), geom, length, false);
    let to_world = |p: &Vector3<f64>| geom.base_frame.transform_point(&(*p).into()).coords;
    Ok(EePose {
        position: to_world(&w.tip),
        marker_positions: [geom.base_frame.translation.vector, to_world(&w.mid), to_world(&w.tip)],
    })
}

/// Points along the arm checked against obstacles: middle and tip markers plus
/// the midpoint of every section chord. World frame; the fixed base is excluded.
pub fn probe_points(q: &DVector<f64>, geom: &ArmGeometry, length: SegmentLength) -> Vec<Vector3<f64>> {
    let w = walk(q.as_slice(), geom, length, true);
    let mut pts = Vec::with_capacity(2 + w.chord_midpoints.len());
    pts.push(w.mid);
    pts.push(w.tip);
    pts.extend(w.chord_midpoints);
    pts.iter()
        .map(|p| geom.base_frame.transform_point(&(*p).into()).coords)
        .collect()
}

/// Central-difference Jacobian of the end-effector position (3 × q_size).
pub fn fk_jacobian(q: &DVector<f64>, geom: &ArmGeometry, length: SegmentLength) -> Result<Matrix3xX<f64>> {
    check_q(q, geom)?;
    Ok(jacobian_unchecked(q, geom, length))
}

fn jacobian_unchecked(q: &DVector<f64>, geom: &ArmGeometry, length: SegmentLength) -> Matrix3xX<f64> {
    let h = FK_JACOBIAN_STEP;
    let mut jac = Matrix3xX::zeros(q.len());
    let mut work = q.clone();
    let rot = geom.base_frame.rotation;
    for j in 0..q.len() {
        work[j] = q[j] + h;
        let plus = walk(work.as_slice(), geom, length, false).tip;
        work[j] = q[j] - h;
        let minus = walk(work.as_slice(), geom, length, false).tip;
        work[j] = q[j];
        jac.set_column(j, &(rot * ((plus - minus) / (2.0 * h))));
    }
    jac
}

/// Map from curvature to a task-space point, with its Jacobian.
pub trait TaskMap: Send + Sync {
    fn position(&self, q: &DVector<f64>) -> Vector3<f64>;
    fn jacobian(&self, q: &DVector<f64>) -> Matrix3xX<f64>;
}

/// End-effector map of an [`ArmGeometry`] under a given link-length model.
#[derive(Debug, Clone)]
pub struct ArmTaskMap {
    pub geometry: ArmGeometry,
    pub length: SegmentLength,
}

impl ArmTaskMap {
    pub fn new(geometry: ArmGeometry, length: SegmentLength) -> Self {
        ArmTaskMap { geometry, length }
    }
}

impl TaskMap for ArmTaskMap {
    fn position(&self, q: &DVector<f64>) -> Vector3<f64> {
        let tip = walk(q.as_slice(), &self.geometry, self.length, false).tip;
        self.geometry.base_frame.transform_point(&tip.into()).coords
    }

    fn jacobian(&self, q: &DVector<f64>) -> Matrix3xX<f64> {
        jacobian_unchecked(q, &self.geometry, self.length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Isometry3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn upright() -> ArmGeometry {
        ArmGeometry { base_frame: Isometry3::identity(), ..ArmGeometry::default() }
    }

    fn single(l0: f64) -> ArmGeometry {
        ArmGeometry {
            n_segments: 1,
            segment_rest_length: vec![l0],
            connector_offset: vec![Vector3::zeros()],
            chamber_angles: vec![[0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]],
            segment_mass: vec![0.1],
            connector_mass: vec![0.0],
            base_frame: Isometry3::identity(),
            ..ArmGeometry::default()
        }
    }

    #[test]
    fn theta_phi_examples() {
        let (x, y) = theta_phi_to_xy(PI / 2.0, 0.0);
        assert_eq!((x, y), (PI / 2.0, 0.0));
        let (x, y) = theta_phi_to_xy(1.0, PI / 2.0);
        assert!(x.abs() < 1e-16 && (y - 1.0).abs() < 1e-16);
        assert_eq!(theta_phi_to_xy(0.0, 1.3), (0.0, 0.0));
    }

    #[test]
    fn xy_to_polar_examples() {
        let p = xy_to_theta_phi(PI / 2.0, 0.0);
        assert_eq!((p.theta, p.phi, p.singular), (PI / 2.0, 0.0, false));
        let p = xy_to_theta_phi(0.0, 0.0);
        assert!(p.singular && p.theta == 0.0 && p.phi == 0.0);
        let p = xy_to_theta_phi(0.3, 0.4);
        assert!((p.theta - 0.5).abs() < 1e-15);
        assert!((p.phi - 4f64.atan2(3.0)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn polar_round_trip(theta in 1e-9f64..=PI, phi in -PI..PI) {
            let (x, y) = theta_phi_to_xy(theta, phi);
            let p = xy_to_theta_phi(x, y);
            let (x2, y2) = theta_phi_to_xy(p.theta, p.phi);
            prop_assert!((x - x2).abs() < 1e-12 && (y - y2).abs() < 1e-12);
            prop_assert!((p.theta - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn chord_examples() {
        assert!((chord_length(PI, 1.0) - 2.0 / PI).abs() < 1e-15);
        assert!((chord_length(PI / 2.0, 1.0) - 2.0 * 2f64.sqrt() / PI).abs() < 1e-15);
        assert_eq!(chord_length(0.0, 0.3), 0.3);
        // series and closed form agree across the switch
        let a = chord_length(CHORD_SERIES_EPS, 1.0);
        let b = chord_length(CHORD_SERIES_EPS * 1.0001, 1.0);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn straight_arm_stacks_lengths() {
        let g = upright();
        let p = forward_kinematics(&DVector::zeros(4), &g, SegmentLength::Chord).unwrap();
        assert!((p.position - Vector3::new(0.0, 0.0, 2.0 * 0.125 + 2.0 * 0.02)).norm() < 1e-12);
        assert!((p.marker_positions[1] - Vector3::new(0.0, 0.0, 0.145)).norm() < 1e-12);
        assert_eq!(p.marker_positions[0], Vector3::zeros());
    }

    #[test]
    fn half_turn_single_section() {
        let g = single(1.0);
        let q = DVector::from_vec(vec![PI, 0.0]);
        let off = forward_kinematics(&q, &g, SegmentLength::Scaled(1.0)).unwrap();
        assert!((off.position - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
        let on = forward_kinematics(&q, &g, SegmentLength::Chord).unwrap();
        assert!((on.position - Vector3::new(-2.0 / PI, 0.0, 0.0)).norm() < 1e-12);
        // analytic arc of length 1 and curvature π, bending toward -x:
        // tip = (-(1 - cos θ)/κ, 0, sin θ / κ)
        let kappa = PI;
        let arc = Vector3::new(-(1.0 - PI.cos()) / kappa, 0.0, PI.sin() / kappa);
        assert!((on.position - arc).norm() < 1e-12);
    }

    #[test]
    fn chord_model_matches_arc_for_general_bend() {
        // single section, bending plane at angle φ
        let g = single(0.2);
        let (theta, phi) = (1.1_f64, 0.0);
        let (tx, ty) = theta_phi_to_xy(theta, phi);
        let p = forward_kinematics(&DVector::from_vec(vec![tx, ty]), &g, SegmentLength::Chord).unwrap();
        let r = 0.2 / theta;
        let arc = Vector3::new(-r * (1.0 - theta.cos()), 0.0, r * theta.sin());
        assert!((p.position - arc).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let g = upright();
        let q = DVector::from_vec(vec![0.0, f64::NAN, 0.0, 0.0]);
        assert!(matches!(
            forward_kinematics(&q, &g, SegmentLength::Chord),
            Err(Error::NonFiniteInput(_))
        ));
        assert!(fk_jacobian(&q, &g, SegmentLength::Chord).is_err());
    }

    #[test]
    fn tip_distance_bounded_by_rest_length() {
        let g = upright();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let q = DVector::from_fn(4, |_, _| rng.random_range(-2.2..2.2));
            let p = forward_kinematics(&q, &g, SegmentLength::Chord).unwrap();
            assert!(p.position.norm() <= g.total_rest_length() + 1e-12);
        }
    }

    #[test]
    fn jacobian_at_rest_is_tangential() {
        let g = single(0.15);
        let j = fk_jacobian(&DVector::zeros(2), &g, SegmentLength::Chord).unwrap();
        assert!(j[(2, 0)].abs() < 1e-9);
        assert!(j[(2, 1)].abs() < 1e-9);
        assert!(j[(0, 0)] < 0.0);
    }

    #[test]
    fn jacobian_matches_directional_differences() {
        let g = ArmGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for _ in 0..100 {
            let q = DVector::from_fn(4, |_, _| rng.random_range(-1.4..1.4));
            let v = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
            let j = fk_jacobian(&q, &g, SegmentLength::Chord).unwrap();
            let ep = forward_kinematics(&(&q + &v * h), &g, SegmentLength::Chord).unwrap().position;
            let em = forward_kinematics(&(&q - &v * h), &g, SegmentLength::Chord).unwrap().position;
            let fd = (ep - em) / (2.0 * h);
            let jv = &j * &v;
            let rel = (fd - Vector3::new(jv[0], jv[1], jv[2])).norm() / fd.norm().max(1e-12);
            assert!(rel < 1e-6, "relative error {rel}");
        }
    }

    #[test]
    fn jacobian_is_deterministic() {
        let g = ArmGeometry::default();
        let q = DVector::from_vec(vec![0.3, -0.2, 0.5, 0.1]);
        let a = fk_jacobian(&q, &g, SegmentLength::Scaled(0.98)).unwrap();
        let b = fk_jacobian(&q, &g, SegmentLength::Scaled(0.98)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn task_map_agrees_with_fk() {
        let g = ArmGeometry::default();
        let map = ArmTaskMap::new(g.clone(), SegmentLength::Chord);
        let q = DVector::from_vec(vec![0.3, -0.2, 0.5, 0.1]);
        let p = forward_kinematics(&q, &g, SegmentLength::Chord).unwrap().position;
        assert!((map.position(&q) - p).norm() < 1e-15);
        assert_eq!(map.jacobian(&q), fk_jacobian(&q, &g, SegmentLength::Chord).unwrap());
    }

    #[test]
    fn probes_include_markers() {
        let g = ArmGeometry::default();
        let q = DVector::from_vec(vec![0.4, 0.1, -0.3, 0.2]);
        let pose = forward_kinematics(&q, &g, SegmentLength::Chord).unwrap();
        let probes = probe_points(&q, &g, SegmentLength::Chord);
        assert_eq!(probes.len(), 4);
        assert!((probes[0] - pose.marker_positions[1]).norm() < 1e-15);
        assert!((probes[1] - pose.position).norm() < 1e-15);
    }
}
