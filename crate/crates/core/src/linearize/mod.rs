//! Per-loop affine state-space model and its discrete-time counterpart.

mod expm;

pub use expm::matrix_exponential;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::DynamicsTerms;
use crate::error::{Error, Result};

/// `ẋ = A x + B p + W` with `x = (q, q̇)`.
#[derive(Debug, Clone)]
pub struct ContinuousSS {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub w: DVector<f64>,
}

/// `x(k+1) = A_d x(k) + B_d p(k) + W_d`, valid for one control loop.
#[derive(Debug, Clone)]
pub struct DiscreteDynamics {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub w: DVector<f64>,
    pub ts: f64,
}

impl DiscreteDynamics {
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u + &self.w
    }
}

/// How the affine drift `W` is held over one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftHold {
    /// `W_d = W · Ts`.
    #[default]
    Euler,
    /// `W_d = ∫₀^Ts e^{Aτ} dτ · W`.
    Exact,
}

/// Assembles `A = [0 I; −B⁻¹K −B⁻¹D]`, `B = [0; B⁻¹A]`, `W = [0; −B⁻¹(c+g)]`.
/// The bias is frozen at the linearization state.
pub fn continuous_ss(terms: &DynamicsTerms) -> Result<ContinuousSS> {
    let n = terms.inertia.nrows();
    let m = terms.allocation.ncols();
    let chol = terms
        .inertia
        .clone()
        .cholesky()
        .ok_or(Error::SingularInertia(f64::INFINITY))?;
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).fill_with_identity();
    a.view_mut((n, 0), (n, n)).copy_from(&(-chol.solve(&terms.stiffness)));
    a.view_mut((n, n), (n, n)).copy_from(&(-chol.solve(&terms.damping)));
    let mut b = DMatrix::zeros(2 * n, m);
    b.view_mut((n, 0), (n, m)).copy_from(&chol.solve(&terms.allocation));
    let mut w = DVector::zeros(2 * n);
    let bias = -chol.solve(&(&terms.coriolis + &terms.gravity - &terms.external));
    w.rows_mut(n, n).copy_from(&bias);
    Ok(ContinuousSS { a, b, w })
}

/// Zero-order-hold discretization. `B_d` comes from the top-right block of
/// `exp([[A, B], [0, 0]] Ts)`, which equals `A⁻¹(A_d − I)B` whenever `A` is
/// invertible and stays defined when it is not.
pub fn discretize(ss: &ContinuousSS, ts: f64, drift: DriftHold) -> Result<DiscreteDynamics> {
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::config("ts", "sampling time must be positive"));
    }
    let n = ss.a.nrows();
    let m = ss.b.ncols();
    let mut aug = DMatrix::zeros(n + m + 1, n + m + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&ss.a);
    aug.view_mut((0, n), (n, m)).copy_from(&ss.b);
    aug.view_mut((0, n + m), (n, 1)).copy_from(&ss.w);
    let e = matrix_exponential(&aug, ts)?;
    let w = match drift {
        DriftHold::Euler => &ss.w * ts,
        DriftHold::Exact => e.view((0, n + m), (n, 1)).column(0).into_owned(),
    };
    Ok(DiscreteDynamics {
        a: e.view((0, 0), (n, n)).into_owned(),
        b: e.view((0, n), (n, m)).into_owned(),
        w,
        ts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_terms(b: f64, k: f64, d: f64, alloc: f64, bias: f64) -> DynamicsTerms {
        let one = |v| DMatrix::from_element(1, 1, v);
        DynamicsTerms {
            inertia: one(b),
            coriolis: DVector::from_element(1, bias),
            gravity: DVector::zeros(1),
            stiffness: one(k),
            damping: one(d),
            allocation: one(alloc),
            external: DVector::zeros(1),
        }
    }

    #[test]
    fn scalar_assembly() {
        let ss = continuous_ss(&scalar_terms(1.0, 2.0, 3.0, 1.0, 4.0)).unwrap();
        assert_eq!(ss.a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]));
        assert_eq!(ss.b, DMatrix::from_row_slice(2, 1, &[0.0, 1.0]));
        assert_eq!(ss.w, DVector::from_vec(vec![0.0, -4.0]));
    }

    #[test]
    fn zero_stiffness_and_damping_gives_integrators() {
        let ss = continuous_ss(&scalar_terms(2.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(ss.a[(1, 0)], 0.0);
        assert_eq!(ss.a[(1, 1)], 0.0);
    }

    #[test]
    fn structure_of_random_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 3;
        let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let terms = DynamicsTerms {
            inertia: &r * r.transpose() + DMatrix::identity(n, n),
            coriolis: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            gravity: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            stiffness: DMatrix::identity(n, n) * 2.0,
            damping: DMatrix::identity(n, n) * 0.3,
            allocation: DMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0)),
            external: DVector::zeros(n),
        };
        let ss = continuous_ss(&terms).unwrap();
        assert_eq!(ss.a.view((0, 0), (n, n)).amax(), 0.0);
        assert_eq!(ss.a.view((0, n), (n, n)).into_owned(), DMatrix::identity(n, n));
        assert_eq!(ss.b.view((0, 0), (n, 2)).amax(), 0.0);
        assert_eq!(ss.w.rows(0, n).amax(), 0.0);
    }

    #[test]
    fn zero_dynamics_discretization() {
        let ss = ContinuousSS {
            a: DMatrix::zeros(2, 2),
            b: DMatrix::from_row_slice(2, 1, &[1.0, 2.0]),
            w: DVector::from_vec(vec![0.5, -1.0]),
        };
        let d = discretize(&ss, 0.2, DriftHold::Euler).unwrap();
        assert!((d.a.clone() - DMatrix::identity(2, 2)).amax() < 1e-15);
        assert!((d.b.clone() - &ss.b * 0.2).amax() < 1e-15);
        assert!((d.w.clone() - &ss.w * 0.2).amax() < 1e-15);
    }

    #[test]
    fn double_integrator() {
        let ss = ContinuousSS {
            a: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            b: DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            w: DVector::zeros(2),
        };
        let d = discretize(&ss, 0.1, DriftHold::Euler).unwrap();
        assert!((d.a - DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0])).amax() < 1e-15);
        assert!((d.b - DMatrix::from_row_slice(2, 1, &[0.005, 0.1])).amax() < 1e-15);
    }

    #[test]
    fn input_matrix_matches_inverse_formula() {
        let ss = ContinuousSS {
            a: DMatrix::from_element(1, 1, -1.0),
            b: DMatrix::from_element(1, 1, 1.0),
            w: DVector::zeros(1),
        };
        let d = discretize(&ss, 0.5, DriftHold::Euler).unwrap();
        assert!((d.b[(0, 0)] - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_sampling_time() {
        let ss = ContinuousSS { a: DMatrix::zeros(1, 1), b: DMatrix::zeros(1, 1), w: DVector::zeros(1) };
        assert!(discretize(&ss, 0.0, DriftHold::Euler).is_err());
    }

    #[test]
    fn exact_drift_uses_integral() {
        let ss = ContinuousSS {
            a: DMatrix::from_element(1, 1, -2.0),
            b: DMatrix::from_element(1, 1, 0.0),
            w: DVector::from_element(1, 3.0),
        };
        let d = discretize(&ss, 0.25, DriftHold::Exact).unwrap();
        let expected = 3.0 * (1.0 - (-0.5f64).exp()) / 2.0;
        assert!((d.w[0] - expected).abs() < 1e-13);
    }
}
