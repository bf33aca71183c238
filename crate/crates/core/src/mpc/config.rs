use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linearize::DriftHold;
use crate::opt::SqpSettings;

/// How many leading horizon steps carry the absolute bounds and inter-step slews.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundSteps {
    /// `⌈N/4⌉`.
    #[default]
    Ceil,
    /// `⌊N/4⌋`, at least one.
    Floor,
}

impl BoundSteps {
    pub fn count(self, horizon: usize) -> usize {
        match self {
            BoundSteps::Ceil => horizon.div_ceil(4),
            BoundSteps::Floor => (horizon / 4).max(1),
        }
    }
}

/// Decision-variable initialization when a new problem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Initialization {
    /// Previous solution shifted by one step, held at the end.
    #[default]
    Warm,
    /// States at the measured value over the whole horizon, inputs at zero.
    Cold,
}

/// Exponential repulsion `L·exp(−l·‖E − o‖²)` around each center.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstaclePenalty {
    pub centers: Vec<Vector3<f64>>,
    pub gain: f64,
    pub decay: f64,
}

impl ObstaclePenalty {
    pub fn value(&self, e: &Vector3<f64>) -> f64 {
        self.centers
            .iter()
            .map(|o| self.gain * (-self.decay * (e - o).norm_squared()).exp())
            .sum()
    }

    pub fn gradient(&self, e: &Vector3<f64>) -> Vector3<f64> {
        self.centers.iter().fold(Vector3::zeros(), |acc, o| {
            let d = e - o;
            acc - d * (2.0 * self.decay * self.gain * (-self.decay * d.norm_squared()).exp())
        })
    }
}

/// Joint-space polytope `A_I q ≤ b_I + ε` with slack weight `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftSet {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub weight: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct MpcConfig {
    pub horizon: usize,
    pub ts: f64,
    /// Stage end-effector weight `Q`.
    pub q_track: Matrix3<f64>,
    /// Terminal end-effector weight `Q_N`.
    pub q_terminal: Matrix3<f64>,
    /// Curvature-rate weight `S`, q_size × q_size.
    pub s_velocity: DMatrix<f64>,
    /// Input weight `R`.
    pub r_input: DMatrix<f64>,
    /// Input-variation weight `R_Δ`.
    pub r_delta: DMatrix<f64>,
    pub p_min: DVector<f64>,
    pub p_max: DVector<f64>,
    /// Per-step slew limit `Δu`.
    pub slew: DVector<f64>,
    /// Half-widths `Q_0` of the tube neighborhood: the curvature deviation fed
    /// to the tube correction is limited to this box.
    pub initial_q_offset: DVector<f64>,
    /// Half-widths `Q̇_0` of the tube neighborhood for the curvature rate.
    pub initial_qd_offset: DVector<f64>,
    /// Largest allowed `|p* − u(0)|` per channel.
    pub tube_clamp: DVector<f64>,
    pub obstacles: Option<ObstaclePenalty>,
    pub soft_set: Option<SoftSet>,
    pub bound_steps: BoundSteps,
    pub initialization: Initialization,
    pub drift: DriftHold,
    pub dare_q: DMatrix<f64>,
    pub dare_r: DMatrix<f64>,
    /// Reuse the last gain while `‖ΔA_d‖_F` stays below this value.
    pub dare_cache_tol: Option<f64>,
    /// Added to the QP Hessian diagonal.
    pub regularization: f64,
    pub sqp: SqpSettings,
}

impl MpcConfig {
    /// Defaults for an arm with `q_size` curvatures and `n_inputs` pseudo-pressures (kPa).
    pub fn new(q_size: usize, n_inputs: usize) -> Self {
        MpcConfig {
            horizon: 7,
            ts: 1.0 / 15.0,
            q_track: Matrix3::identity() * 1e4,
            q_terminal: Matrix3::identity() * 1e4,
            s_velocity: DMatrix::identity(q_size, q_size) * 1e-2,
            r_input: DMatrix::identity(n_inputs, n_inputs) * 1e-6,
            r_delta: DMatrix::identity(n_inputs, n_inputs) * 1e-4,
            p_min: DVector::from_element(n_inputs, -150.0),
            p_max: DVector::from_element(n_inputs, 150.0),
            slew: DVector::from_element(n_inputs, 20.0),
            initial_q_offset: DVector::from_element(q_size, 0.01),
            initial_qd_offset: DVector::from_element(q_size, 0.05),
            tube_clamp: DVector::from_element(n_inputs, 0.5),
            obstacles: None,
            soft_set: None,
            bound_steps: BoundSteps::Ceil,
            initialization: Initialization::Warm,
            drift: DriftHold::Euler,
            dare_q: DMatrix::identity(2 * q_size, 2 * q_size),
            dare_r: DMatrix::identity(n_inputs, n_inputs) * 1e-3,
            dare_cache_tol: None,
            regularization: 1e-9,
            sqp: SqpSettings::default(),
        }
    }

    pub fn q_size(&self) -> usize {
        self.s_velocity.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.r_input.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.q_size(), self.n_inputs());
        if self.horizon < 2 {
            return Err(Error::config("controller.horizon", "must be at least 2"));
        }
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::config("controller.ts", "must be positive"));
        }
        let square = |name: &str, mat: &DMatrix<f64>, dim: usize| -> Result<()> {
            if mat.shape() != (dim, dim) {
                return Err(Error::config(format!("controller.{name}"), format!("must be {dim}×{dim}")));
            }
            if (mat - mat.transpose()).amax() > 1e-12 * mat.amax().max(1.0) {
                return Err(Error::config(format!("controller.{name}"), "must be symmetric"));
            }
            if mat.clone().symmetric_eigenvalues().min() < -1e-12 {
                return Err(Error::config(format!("controller.{name}"), "must be positive semidefinite"));
            }
            Ok(())
        };
        square("s_velocity", &self.s_velocity, n)?;
        square("r_input", &self.r_input, m)?;
        square("r_delta", &self.r_delta, m)?;
        square("dare_q", &self.dare_q, 2 * n)?;
        square("dare_r", &self.dare_r, m)?;
        if self.dare_r.clone().symmetric_eigenvalues().min() <= 0.0 {
            return Err(Error::config("controller.dare_r", "must be positive definite"));
        }
        for (name, w) in [("q_track", &self.q_track), ("q_terminal", &self.q_terminal)] {
            if (w - w.transpose()).amax() > 1e-12 * w.amax().max(1.0) || w.symmetric_eigenvalues().min() < -1e-12 {
                return Err(Error::config(format!("controller.{name}"), "must be symmetric positive semidefinite"));
            }
        }
        let vectors = [
            ("p_min", &self.p_min, m),
            ("p_max", &self.p_max, m),
            ("slew", &self.slew, m),
            ("tube_clamp", &self.tube_clamp, m),
            ("initial_q_offset", &self.initial_q_offset, n),
            ("initial_qd_offset", &self.initial_qd_offset, n),
        ];
        for (name, v, dim) in vectors {
            if v.len() != dim {
                return Err(Error::config(format!("controller.{name}"), format!("must have {dim} entries")));
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::config(format!("controller.{name}"), "must be finite"));
            }
        }
        for i in 0..m {
            if self.p_min[i] >= self.p_max[i] {
                return Err(Error::config(format!("controller.p_min[{i}]"), "must be below p_max"));
            }
            if self.slew[i] <= 0.0 {
                return Err(Error::config(format!("controller.slew[{i}]"), "must be positive"));
            }
            if self.tube_clamp[i] < 0.0 {
                return Err(Error::config(format!("controller.tube_clamp[{i}]"), "must be non-negative"));
            }
        }
        if self.initial_q_offset.iter().chain(self.initial_qd_offset.iter()).any(|v| *v < 0.0) {
            return Err(Error::config("controller.initial_q_offset", "half-widths must be non-negative"));
        }
        if let Some(p) = &self.obstacles {
            if !(p.gain > 0.0 && p.decay > 0.0) {
                return Err(Error::config("controller.obstacle_penalty", "gain and decay must be positive"));
            }
        }
        if let Some(s) = &self.soft_set {
            if s.a.ncols() != n || s.a.nrows() != s.b.len() {
                return Err(Error::config("controller.soft_set", "A_I must be rows × q_size with matching b_I"));
            }
            if s.weight.shape() != (s.b.len(), s.b.len())
                || s.weight.clone().symmetric_eigenvalues().min() <= 0.0
            {
                return Err(Error::config("controller.soft_set.weight", "must be positive definite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_steps_for_default_horizon() {
        assert_eq!(BoundSteps::Ceil.count(7), 2);
        assert_eq!(BoundSteps::Floor.count(7), 1);
        assert_eq!(BoundSteps::Ceil.count(8), 2);
        assert_eq!(BoundSteps::Floor.count(2), 1);
    }

    #[test]
    fn penalty_values() {
        let p = ObstaclePenalty { centers: vec![Vector3::new(0.1, 0.0, 0.0)], gain: 3.0, decay: 100.0 };
        assert_eq!(p.value(&Vector3::new(0.1, 0.0, 0.0)), 3.0);
        let d = p.value(&Vector3::new(0.2, 0.0, 0.0));
        assert!((d - 3.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(p.value(&Vector3::new(1e3, 0.0, 0.0)) == 0.0);
        // gradient against central differences
        let e = Vector3::new(0.15, 0.03, -0.02);
        let g = p.gradient(&e);
        for i in 0..3 {
            let mut ep = e;
            let mut em = e;
            ep[i] += 1e-7;
            em[i] -= 1e-7;
            let fd = (p.value(&ep) - p.value(&em)) / 2e-7;
            assert!((fd - g[i]).abs() < 1e-6 * g.norm().max(1.0));
        }
    }

    #[test]
    fn default_config_validates() {
        MpcConfig::new(4, 4).validate().unwrap();
        let mut c = MpcConfig::new(4, 4);
        c.horizon = 1;
        assert!(c.validate().is_err());
        let mut c = MpcConfig::new(4, 4);
        c.p_min[1] = 200.0;
        assert!(c.validate().is_err());
    }
}
