//! Curvature ↔ augmented-joint mapping `ξ = m(q)` and its derivatives.

use nalgebra::{DMatrix, DVector};

use crate::arm::{chord_length, ArmGeometry};

/// Below this half-angle the chord derivatives use their Taylor series.
const SERIES_HALF_ANGLE: f64 = 0.05;

/// `h'(θ)/θ` for the chord `h(θ) = l sin(θ/2)/(θ/2)`.
fn chord_slope_over_theta(theta: f64, l: f64) -> f64 {
    let s = 0.5 * theta.abs();
    if s < SERIES_HALF_ANGLE {
        let s2 = s * s;
        0.25 * l * (-1.0 / 3.0 + s2 / 30.0 - s2 * s2 / 840.0 + s2 * s2 * s2 / 45360.0)
    } else {
        let (sn, cs) = s.sin_cos();
        l * (s * cs - sn) / (4.0 * s * s * s)
    }
}

/// `(d/dθ [h'(θ)/θ]) / θ`, the radial part of the chord Hessian.
fn chord_curvature_term(theta: f64, l: f64) -> f64 {
    let s = 0.5 * theta.abs();
    if s < SERIES_HALF_ANGLE {
        let s2 = s * s;
        l / 16.0 * (1.0 / 15.0 - s2 / 210.0 + s2 * s2 / 7560.0)
    } else {
        let (sn, cs) = s.sin_cos();
        l / 16.0 * (3.0 * sn - 3.0 * s * cs - s * s * sn) / s.powi(5)
    }
}

/// Joint vector of the augmented chain for curvature `q`.
pub fn map_to_augmented(q: &DVector<f64>, geom: &ArmGeometry) -> DVector<f64> {
    let ns = geom.n_sections();
    let mut xi = DVector::zeros(5 * ns);
    for s in 0..ns {
        let (tx, ty) = (q[2 * s], q[2 * s + 1]);
        xi[5 * s] = -0.5 * tx;
        xi[5 * s + 1] = -0.5 * ty;
        xi[5 * s + 2] = chord_length(tx.hypot(ty), geom.section_rest_length(s));
        xi[5 * s + 3] = -0.5 * tx;
        xi[5 * s + 4] = -0.5 * ty;
    }
    xi
}

/// `J_m = ∂m/∂q`, shape `(5·n_sections) × q_size`.
pub fn mapping_jacobian(q: &DVector<f64>, geom: &ArmGeometry) -> DMatrix<f64> {
    let ns = geom.n_sections();
    let mut j = DMatrix::zeros(5 * ns, 2 * ns);
    for s in 0..ns {
        let (tx, ty) = (q[2 * s], q[2 * s + 1]);
        let f = chord_slope_over_theta(tx.hypot(ty), geom.section_rest_length(s));
        j[(5 * s, 2 * s)] = -0.5;
        j[(5 * s + 1, 2 * s + 1)] = -0.5;
        j[(5 * s + 2, 2 * s)] = f * tx;
        j[(5 * s + 2, 2 * s + 1)] = f * ty;
        j[(5 * s + 3, 2 * s)] = -0.5;
        j[(5 * s + 4, 2 * s + 1)] = -0.5;
    }
    j
}

/// `J̇_m q̇`, nonzero only on the prismatic rows.
pub fn mapping_jacobian_dot_qd(q: &DVector<f64>, qd: &DVector<f64>, geom: &ArmGeometry) -> DVector<f64> {
    let ns = geom.n_sections();
    let mut out = DVector::zeros(5 * ns);
    for s in 0..ns {
        let (tx, ty) = (q[2 * s], q[2 * s + 1]);
        let (vx, vy) = (qd[2 * s], qd[2 * s + 1]);
        let theta = tx.hypot(ty);
        let l = geom.section_rest_length(s);
        let f = chord_slope_over_theta(theta, l);
        let g = chord_curvature_term(theta, l);
        let radial = tx * vx + ty * vy;
        out[5 * s + 2] = f * (vx * vx + vy * vy) + g * radial * radial;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::AugmentedChain;
    use crate::arm::{forward_kinematics, SegmentLength};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn rest_configuration() {
        let g = ArmGeometry::default();
        let xi = map_to_augmented(&DVector::zeros(4), &g);
        for s in 0..2 {
            for k in [0, 1, 3, 4] {
                assert_eq!(xi[5 * s + k], 0.0);
            }
            assert_eq!(xi[5 * s + 2], 0.125);
        }
        let j = mapping_jacobian(&DVector::zeros(4), &g);
        assert_eq!(j.ncols(), 4);
        assert_eq!(j[(0, 0)], -0.5);
        assert_eq!(j[(2, 0)], 0.0);
        assert_eq!(j[(2, 1)], 0.0);
    }

    #[test]
    fn half_turn_section() {
        let mut g = ArmGeometry { n_segments: 1, segment_rest_length: vec![1.0], ..ArmGeometry::default() };
        g.connector_offset.truncate(1);
        g.chamber_angles.truncate(1);
        g.segment_mass.truncate(1);
        g.connector_mass.truncate(1);
        let xi = map_to_augmented(&DVector::from_vec(vec![PI, 0.0]), &g);
        let expected = [-PI / 2.0, 0.0, 2.0 / PI, -PI / 2.0, 0.0];
        for k in 0..5 {
            assert!((xi[k] - expected[k]).abs() < 1e-15, "{xi}");
        }
    }

    #[test]
    fn chain_fk_matches_curvature_fk() {
        let g = ArmGeometry::default();
        let chain = AugmentedChain::from_geometry(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let q = DVector::from_fn(4, |_, _| rng.random_range(-2.0..2.0));
            let a = chain.tip_position(&map_to_augmented(&q, &g));
            let b = forward_kinematics(&q, &g, SegmentLength::Chord).unwrap().position;
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let g = ArmGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = 1e-6;
        for trial in 0..100 {
            // include near-straight states to exercise the series branch
            let scale = if trial % 4 == 0 { 1e-3 } else { 2.0 };
            let q = DVector::from_fn(4, |_, _| rng.random_range(-scale..scale));
            let j = mapping_jacobian(&q, &g);
            for c in 0..4 {
                let mut p = q.clone();
                p[c] += h;
                let mut m = q.clone();
                m[c] -= h;
                let fd = (map_to_augmented(&p, &g) - map_to_augmented(&m, &g)) / (2.0 * h);
                let err = (fd - j.column(c)).amax();
                assert!(err < 1e-6 * j.column(c).amax().max(1e-3), "trial {trial} col {c}: {err}");
            }
        }
    }

    #[test]
    fn jacobian_rate_matches_differences() {
        let g = ArmGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = 1e-6;
        for trial in 0..50 {
            let scale = if trial % 5 == 0 { 1e-2 } else { 1.5 };
            let q = DVector::from_fn(4, |_, _| rng.random_range(-scale..scale));
            let qd = DVector::from_fn(4, |_, _| rng.random_range(-2.0..2.0));
            let fd = (mapping_jacobian(&(&q + &qd * h), &g) - mapping_jacobian(&(&q - &qd * h), &g))
                / (2.0 * h)
                * &qd;
            let an = mapping_jacobian_dot_qd(&q, &qd, &g);
            assert!((fd - &an).amax() < 1e-7, "trial {trial}");
        }
    }
}
