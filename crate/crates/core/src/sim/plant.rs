use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::arm::{ArmGeometry, PseudoPressure};
use crate::dynamics::{dynamics_terms, plant_accel, DynamicsParams};
use crate::error::{Error, Result};
use crate::opt::spectral_radius;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantOptions {
    /// Minimum RK4 steps per call of [`plant_step`]; more are taken when the
    /// fastest mode of the arm would make explicit integration unstable.
    pub substeps: usize,
    /// First-order actuation lag time constant, seconds; zero disables it.
    pub lag: f64,
    /// Standard deviation of the additive noise on observed curvatures, rad.
    pub noise_std: f64,
}

impl Default for PlantOptions {
    fn default() -> Self {
        PlantOptions { substeps: 20, lag: 0.0, noise_std: 0.0 }
    }
}

/// True arm state plus the pressure actually acting on it.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    /// Effective pseudo-pressure after the actuation lag.
    pub p_eff: DVector<f64>,
}

impl PlantState {
    pub fn at_rest(q_size: usize, n_inputs: usize) -> Self {
        PlantState { q: DVector::zeros(q_size), qd: DVector::zeros(q_size), p_eff: DVector::zeros(n_inputs) }
    }

    /// `(q, q̇)` stacked.
    pub fn x(&self) -> DVector<f64> {
        let n = self.q.len();
        let mut x = DVector::zeros(2 * n);
        x.rows_mut(0, n).copy_from(&self.q);
        x.rows_mut(n, n).copy_from(&self.qd);
        x
    }
}

/// The simulated arm: the nonlinear model with its own (possibly perturbed) parameters.
#[derive(Debug, Clone)]
pub struct Plant {
    pub geometry: ArmGeometry,
    pub params: DynamicsParams,
    pub options: PlantOptions,
}

fn accel(geom: &ArmGeometry, params: &DynamicsParams, q: &DVector<f64>, qd: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
    let terms = dynamics_terms(q, qd, geom, params).map_err(|e| match e {
        Error::NonFiniteInput(_) => Error::NonFinite("plant state"),
        other => other,
    })?;
    plant_accel(q, qd, &PseudoPressure(p.clone()), &terms)
}

impl Plant {
    /// Advances the true state by `dt` under a constant commanded pressure.
    /// With a lag, the effective pressure follows `ṗ = (p_cmd − p)/τ`, which is
    /// integrated exactly; the arm itself uses classic RK4.
    pub fn step(&self, state: &PlantState, p_cmd: &DVector<f64>, dt: f64) -> Result<PlantState> {
        plant_step(self, state, p_cmd, dt)
    }

    /// Measured `(q, q̇)` with Gaussian noise on the curvatures only.
    pub fn observe<R: Rng>(&self, state: &PlantState, rng: &mut R) -> DVector<f64> {
        let mut x = state.x();
        if self.options.noise_std > 0.0 {
            let normal = Normal::new(0.0, self.options.noise_std).expect("validated noise level");
            for i in 0..state.q.len() {
                x[i] += normal.sample(rng);
            }
        }
        x
    }
}

/// Keeps `h·|λ|` inside the RK4 stability region, with `|λ|` bounded by
/// `ρ(B⁻¹D) + √ρ(B⁻¹K)` at the starting configuration.
fn stable_substeps(geom: &ArmGeometry, params: &DynamicsParams, q: &DVector<f64>, dt: f64) -> Result<usize> {
    const STABLE_STEP: f64 = 1.2;
    let terms = dynamics_terms(q, &DVector::zeros(q.len()), geom, params).map_err(|e| match e {
        Error::NonFiniteInput(_) => Error::NonFinite("plant state"),
        other => other,
    })?;
    let chol = terms.inertia.clone().cholesky().ok_or(Error::SingularInertia(f64::INFINITY))?;
    let rate = spectral_radius(&chol.solve(&terms.damping)) + spectral_radius(&chol.solve(&terms.stiffness)).sqrt();
    Ok(((dt * rate / STABLE_STEP).ceil() as usize).max(1))
}

pub fn plant_step(plant: &Plant, state: &PlantState, p_cmd: &DVector<f64>, dt: f64) -> Result<PlantState> {
    if !(dt > 0.0) {
        return Err(Error::config("plant.dt", "must be positive"));
    }
    let (geom, params) = (&plant.geometry, &plant.params);
    let substeps = plant.options.substeps.max(1).max(stable_substeps(geom, params, &state.q, dt)?);
    let h = dt / substeps as f64;
    let tau = plant.options.lag;
    let mut q = state.q.clone();
    let mut qd = state.qd.clone();
    let mut p0 = state.p_eff.clone();
    let pressure_at = |p_start: &DVector<f64>, s: f64| -> DVector<f64> {
        if tau > 0.0 {
            p_cmd + (p_start - p_cmd) * (-s / tau).exp()
        } else {
            p_cmd.clone()
        }
    };
    for _ in 0..substeps {
        let (pa, pm, pb) = (pressure_at(&p0, 0.0), pressure_at(&p0, 0.5 * h), pressure_at(&p0, h));
        let k1v = accel(geom, params, &q, &qd, &pa)?;
        let k1x = qd.clone();
        let q2 = &q + &k1x * (0.5 * h);
        let v2 = &qd + &k1v * (0.5 * h);
        let k2v = accel(geom, params, &q2, &v2, &pm)?;
        let q3 = &q + &v2 * (0.5 * h);
        let v3 = &qd + &k2v * (0.5 * h);
        let k3v = accel(geom, params, &q3, &v3, &pm)?;
        let q4 = &q + &v3 * h;
        let v4 = &qd + &k3v * h;
        let k4v = accel(geom, params, &q4, &v4, &pb)?;
        q += (k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        qd += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        p0 = pb;
        if !q.iter().chain(qd.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("plant state"));
        }
    }
    Ok(PlantState { q, qd, p_eff: p0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::mechanical_energy;

    fn plant(lag: f64, substeps: usize) -> Plant {
        let geometry = ArmGeometry::default();
        let params = DynamicsParams::new(&geometry, 0.5, 0.05, &[0.004, 0.004]);
        Plant { geometry, params, options: PlantOptions { substeps, lag, noise_std: 0.0 } }
    }

    #[test]
    fn hanging_equilibrium_is_fixed() {
        let p = plant(0.0, 20);
        let mut s = PlantState::at_rest(4, 4);
        for _ in 0..15 {
            s = p.step(&s, &DVector::zeros(4), 1.0 / 15.0).unwrap();
        }
        assert!(s.q.amax() < 1e-9 && s.qd.amax() < 1e-9);
    }

    #[test]
    fn vanishing_lag_matches_direct_actuation() {
        let cmd = DVector::from_vec(vec![40.0, -20.0, 10.0, 30.0]);
        let direct = plant(0.0, 40);
        let lagged = plant(1e-7, 40);
        let mut a = PlantState::at_rest(4, 4);
        let mut b = a.clone();
        for _ in 0..10 {
            a = direct.step(&a, &cmd, 0.05).unwrap();
            b = lagged.step(&b, &cmd, 0.05).unwrap();
        }
        // the lagged run starts each substep from the previous pressure, so
        // only the first substep differs by O(h); the gap is a small fraction
        assert!((&a.q - &b.q).amax() < 1e-3 * a.q.amax(), "{} vs {}", (&a.q - &b.q).amax(), a.q.amax());
    }

    #[test]
    fn lag_slows_the_response() {
        let cmd = DVector::from_vec(vec![40.0, 0.0, 0.0, 0.0]);
        let a = plant(0.0, 20).step(&PlantState::at_rest(4, 4), &cmd, 0.1).unwrap();
        let b = plant(0.1, 20).step(&PlantState::at_rest(4, 4), &cmd, 0.1).unwrap();
        assert!(b.q[0].abs() < a.q[0].abs());
        assert!((b.p_eff[0] - 40.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn passive_swing_conserves_energy() {
        let mut p = plant(0.0, 1);
        p.params.damping *= 0.0;
        let mut s = PlantState::at_rest(4, 4);
        s.q = DVector::from_vec(vec![0.6, -0.3, 0.4, 0.2]);
        let energy = |s: &PlantState| mechanical_energy(&s.q, &s.qd, &p.geometry, &p.params).total();
        let e0 = energy(&s);
        let rest = energy(&PlantState::at_rest(4, 4));
        let mut worst: f64 = 0.0;
        for _ in 0..2000 {
            s = p.step(&s, &DVector::zeros(4), 1e-4).unwrap();
            worst = worst.max((energy(&s) - e0).abs());
        }
        assert!(worst / (e0 - rest) < 1e-3, "{}", worst / (e0 - rest));
    }

    #[test]
    fn noise_touches_curvature_only() {
        use rand::SeedableRng;
        let mut p = plant(0.0, 1);
        p.options.noise_std = 1e-3;
        let s = PlantState::at_rest(4, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let x = p.observe(&s, &mut rng);
        assert!(x.rows(0, 4).amax() > 0.0);
        assert_eq!(x.rows(4, 4).amax(), 0.0);
    }
}
