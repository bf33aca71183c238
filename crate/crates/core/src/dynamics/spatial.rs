//! Minimal 6D spatial algebra, angular part first.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

pub(crate) fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Plücker transform of motion vectors from frame A to frame B, where `e`
/// rotates A coordinates into B coordinates and `r` is B's origin in A.
pub(crate) fn plucker(e: &Matrix3<f64>, r: &Vector3<f64>) -> Matrix6<f64> {
    let mut x = Matrix6::zeros();
    x.fixed_view_mut::<3, 3>(0, 0).copy_from(e);
    x.fixed_view_mut::<3, 3>(3, 3).copy_from(e);
    x.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-e * skew(r)));
    x
}

/// Motion cross product operator `v×`.
pub(crate) fn crm(v: &Vector6<f64>) -> Matrix6<f64> {
    let w = skew(&v.fixed_rows::<3>(0).into_owned());
    let l = skew(&v.fixed_rows::<3>(3).into_owned());
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&l);
    m
}

/// Force cross product operator `v×*`.
pub(crate) fn crf(v: &Vector6<f64>) -> Matrix6<f64> {
    -crm(v).transpose()
}

/// Spatial inertia about the body origin of a body with mass `m`, center of
/// mass `c` and rotational inertia `ic` about the center of mass.
pub(crate) fn spatial_inertia(m: f64, c: &Vector3<f64>, ic: &Matrix3<f64>) -> Matrix6<f64> {
    let cx = skew(c);
    let mut i = Matrix6::zeros();
    i.fixed_view_mut::<3, 3>(0, 0).copy_from(&(ic + m * cx * cx.transpose()));
    i.fixed_view_mut::<3, 3>(0, 3).copy_from(&(m * cx));
    i.fixed_view_mut::<3, 3>(3, 0).copy_from(&(m * cx.transpose()));
    i.fixed_view_mut::<3, 3>(3, 3).copy_from(&(m * Matrix3::identity()));
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_inertia_matches_kinetic_energy() {
        // point mass at c rotating with ω about the origin: KE = ½ m |ω × c|²
        let m = 0.7;
        let c = Vector3::new(0.1, -0.2, 0.3);
        let w = Vector3::new(0.4, 1.1, -0.5);
        let i = spatial_inertia(m, &c, &Matrix3::zeros());
        let v = Vector6::new(w.x, w.y, w.z, 0.0, 0.0, 0.0);
        let ke = 0.5 * v.dot(&(i * v));
        assert!((ke - 0.5 * m * w.cross(&c).norm_squared()).abs() < 1e-14);
    }

    #[test]
    fn plucker_composes() {
        let e1 = crate::arm::rot_y(0.3);
        let e2 = crate::arm::rot_x(-0.4);
        let r1 = Vector3::new(0.0, 0.0, 0.2);
        let r2 = Vector3::new(0.1, 0.0, 0.0);
        let x1 = plucker(&e1, &r1);
        let x2 = plucker(&e2, &r2);
        // combined: rotation e2 e1, origin r1 + e1ᵀ r2
        let x = plucker(&(e2 * e1), &(r1 + e1.transpose() * r2));
        assert!((x2 * x1 - x).abs().max() < 1e-14);
    }
}
