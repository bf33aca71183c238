//! Discrete algebraic Riccati equation by the structured doubling algorithm.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DareSolution {
    /// Stabilizing solution of `P = AᵀPA − AᵀPB(R+BᵀPB)⁻¹BᵀPA + Q`.
    pub p: DMatrix<f64>,
    /// Feedback gain with the convention `u = K x`, i.e. `K = −(R+BᵀPB)⁻¹BᵀPA`.
    pub k: DMatrix<f64>,
    /// Frobenius norm of the Riccati residual divided by `max(1, ‖P‖_F)`.
    pub residual: f64,
    /// Spectral radius of `A + BK`.
    pub closed_loop_radius: f64,
    pub iterations: usize,
}

pub const DARE_MAX_ITER: usize = 100;
pub const DARE_TOL: f64 = 1e-10;

pub fn riccati_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = r + b.transpose() * p * b;
    let bpa = b.transpose() * p * a;
    let sol = s
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Dimension("R + BᵀPB is not positive definite".into()))?
        .solve(&bpa);
    Ok(a.transpose() * p * a - bpa.transpose() * sol + q - p)
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves the DARE for `Q ⪰ 0`, `R ≻ 0`. Returns `NotConverged` when the
/// iteration stalls, the residual is too large, or the closed loop is not
/// strictly stable.
pub fn solve_dare(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DareSolution> {
    let n = a.nrows();
    let m = b.ncols();
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(Error::Dimension("inconsistent DARE dimensions".into()));
    }
    if !(a.iter().chain(b.iter()).chain(q.iter()).chain(r.iter()).all(|v| v.is_finite())) {
        return Err(Error::NonFiniteInput("solve_dare"));
    }
    let r_chol = r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Dimension("R is not positive definite".into()))?;
    let eye = DMatrix::<f64>::identity(n, n);
    let mut ak = a.clone();
    let mut gk = b * r_chol.solve(&b.transpose());
    let mut hk = q.clone();
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=DARE_MAX_ITER {
        iterations = it;
        let w = &eye + &gk * &hk;
        let lu = w.lu();
        let w_a = lu.solve(&ak).ok_or(Error::NotConverged { iterations: it, residual: f64::INFINITY })?;
        let w_g = lu.solve(&gk).ok_or(Error::NotConverged { iterations: it, residual: f64::INFINITY })?;
        let a_next = &ak * &w_a;
        let g_next = &gk + &ak * w_g * ak.transpose();
        let h_next = &hk + ak.transpose() * &hk * &w_a;
        let h_next = (&h_next + h_next.transpose()) * 0.5;
        let g_next = (&g_next + g_next.transpose()) * 0.5;
        let change = (&h_next - &hk).norm() / h_next.norm().max(1.0);
        ak = a_next;
        gk = g_next;
        hk = h_next;
        if !hk.iter().all(|v| v.is_finite()) {
            return Err(Error::NotConverged { iterations: it, residual: f64::INFINITY });
        }
        if change < 1e-14 {
            converged = true;
            break;
        }
    }
    let p = hk;
    let residual = riccati_residual(a, b, q, r, &p)?.norm() / p.norm().max(1.0);
    if !converged && residual > DARE_TOL {
        return Err(Error::NotConverged { iterations, residual });
    }
    if residual > DARE_TOL {
        return Err(Error::NotConverged { iterations, residual });
    }
    let s = r + b.transpose() * &p * b;
    let k = -s
        .cholesky()
        .ok_or_else(|| Error::Dimension("R + BᵀPB is not positive definite".into()))?
        .solve(&(b.transpose() * &p * a));
    let closed_loop_radius = spectral_radius(&(a + b * &k));
    if closed_loop_radius >= 1.0 {
        return Err(Error::NotConverged { iterations, residual });
    }
    Ok(DareSolution { p, k, residual, closed_loop_radius, iterations })
}

/// Gain applied to a state error; zero when no stabilizing solution exists.
pub fn gain_or_zero(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    match solve_dare(a, b, q, r) {
        Ok(s) => (s.k, true),
        Err(_) => (DMatrix::zeros(b.ncols(), a.nrows()), false),
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_dynamics_gives_q() {
        let a = DMatrix::zeros(2, 2);
        let b = DMatrix::identity(2, 2);
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        let s = solve_dare(&a, &b, &q, &DMatrix::identity(2, 2)).unwrap();
        assert!((&s.p - &q).amax() < 1e-12);
        assert!(s.k.amax() < 1e-12);
    }

    #[test]
    fn scalar_golden_ratio() {
        // a = b = q = r = 1: p² − p − 1 = 0
        let one = DMatrix::from_element(1, 1, 1.0);
        let s = solve_dare(&one, &one, &one, &one).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s.p[(0, 0)] - phi).abs() < 1e-10);
        assert!((s.k[(0, 0)] + phi / (1.0 + phi)).abs() < 1e-10);
    }

    #[test]
    fn unstable_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.2..1.2));
            let b = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0));
            let q = DMatrix::identity(4, 4);
            let r = DMatrix::identity(2, 2) * 0.5;
            let s = solve_dare(&a, &b, &q, &r).unwrap();
            assert!(s.residual < 1e-10);
            assert!(s.closed_loop_radius < 1.0);
            let res = riccati_residual(&a, &b, &q, &r, &s.p).unwrap();
            assert!(res.amax() < 1e-8 * s.p.amax().max(1.0));
            let eig = s.p.clone().symmetric_eigenvalues();
            assert!(eig.min() > 0.0);
        }
    }

    #[test]
    fn uncontrollable_unstable_mode_fails() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let q = DMatrix::identity(2, 2);
        let r = DMatrix::identity(1, 1);
        assert!(solve_dare(&a, &b, &q, &r).is_err());
        let (k, ok) = gain_or_zero(&a, &b, &q, &r);
        assert!(!ok);
        assert_eq!(k.amax(), 0.0);
    }
}
