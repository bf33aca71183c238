//! Offline randomized search for an axis-aligned curvature box that keeps the
//! arm clear of obstacles while most targets stay reachable.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arm::{probe_points, ArmGeometry, SegmentLength};
use crate::error::{Error, Result};

/// Spherical obstacle in the world frame (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Sphere {
    pub fn center(&self) -> Vector3<f64> {
        Vector3::from(self.center)
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (p - self.center()).norm() < self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinderConfig {
    pub n_trials: usize,
    pub n_samples: usize,
    pub targets: Vec<[f64; 3]>,
    /// A target counts as reached when some sampled end-effector lies within this distance.
    #[serde(default = "default_neighborhood")]
    pub neighborhood: f64,
    /// Fraction of targets that must be reached.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub obstacles: Vec<Sphere>,
    #[serde(default)]
    pub seed: u64,
}

fn default_neighborhood() -> f64 {
    0.02
}

fn default_threshold() -> f64 {
    0.9
}

impl FinderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::config("finder.n_trials", "must be at least 1"));
        }
        if self.n_samples == 0 {
            return Err(Error::config("finder.n_samples", "must be at least 1"));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::config("finder.threshold", "must lie in (0, 1]"));
        }
        if !(self.neighborhood > 0.0) {
            return Err(Error::config("finder.neighborhood", "must be positive"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0) || !o.center.iter().all(|c| c.is_finite()) {
                return Err(Error::config(format!("finder.obstacles[{i}]"), "radius must be positive and center finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConstraintBox {
    /// `±π/2` on every coordinate.
    pub fn standard(q_size: usize) -> Self {
        ConstraintBox { lower: vec![-FRAC_PI_2; q_size], upper: vec![FRAC_PI_2; q_size] }
    }

    pub fn zero(q_size: usize) -> Self {
        ConstraintBox { lower: vec![0.0; q_size], upper: vec![0.0; q_size] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// 2-norm of the diagonal `q_u − q_l`.
    pub fn size(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (u - l) * (u - l)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, q: &DVector<f64>) -> bool {
        q.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn is_subset_of(&self, other: &ConstraintBox) -> bool {
        (0..self.dim()).all(|i| other.lower[i] <= self.lower[i] && self.upper[i] <= other.upper[i])
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::config("box", "lower and upper must have equal length"));
        }
        for i in 0..self.dim() {
            let (l, u) = (self.lower[i], self.upper[i]);
            if !(l <= u) {
                return Err(Error::config(format!("box.lower[{i}]"), "must not exceed upper"));
            }
            if l < -FRAC_PI_2 - 1e-12 || u > FRAC_PI_2 + 1e-12 {
                return Err(Error::config(format!("box[{i}]"), "must lie within ±π/2"));
            }
        }
        Ok(())
    }
}

/// `A_I = (I; −I)`, `b_I = (q_u; −q_l)`.
pub fn box_to_polytope(b: &ConstraintBox) -> (DMatrix<f64>, DVector<f64>) {
    let n = b.dim();
    let mut a = DMatrix::zeros(2 * n, n);
    let mut rhs = DVector::zeros(2 * n);
    for i in 0..n {
        a[(i, i)] = 1.0;
        a[(n + i, i)] = -1.0;
        rhs[i] = b.upper[i];
        rhs[n + i] = -b.lower[i];
    }
    (a, rhs)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Samples curvatures uniformly in `[q_l, q_u]` from random stream `stream`.
/// True iff no probe point of any sample enters an obstacle and at least
/// `threshold` of the targets have a sampled end-effector within the neighborhood.
pub fn check_inclusion_stream(b: &ConstraintBox, cfg: &FinderConfig, geom: &ArmGeometry, stream: u64) -> bool {
    let mut rng = rng_for(cfg.seed, stream);
    let targets: Vec<Vector3<f64>> = cfg.targets.iter().map(|t| Vector3::from(*t)).collect();
    let mut reached = vec![false; targets.len()];
    let mut q = DVector::zeros(b.dim());
    for _ in 0..cfg.n_samples {
        for i in 0..b.dim() {
            q[i] = uniform(&mut rng, b.lower[i], b.upper[i]);
        }
        let probes = probe_points(&q, geom, SegmentLength::Chord);
        if probes.iter().any(|p| cfg.obstacles.iter().any(|o| o.contains(p))) {
            return false;
        }
        let tip = probes[1];
        for (t, r) in targets.iter().zip(reached.iter_mut()) {
            if !*r && (tip - t).norm() <= cfg.neighborhood {
                *r = true;
            }
        }
    }
    if targets.is_empty() {
        return true;
    }
    let hit = reached.iter().filter(|r| **r).count() as f64;
    hit >= cfg.threshold * targets.len() as f64
}

/// [`check_inclusion_stream`] on the configuration's base stream.
pub fn check_inclusion(b: &ConstraintBox, cfg: &FinderConfig, geom: &ArmGeometry) -> bool {
    check_inclusion_stream(b, cfg, geom, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedTrial {
    pub trial: usize,
    pub candidate: ConstraintBox,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinderReport {
    pub constraint_box: ConstraintBox,
    /// True when the standard box passed and no search was run.
    pub standard: bool,
    /// Every candidate that replaced the incumbent, in trial order.
    pub accepted: Vec<AcceptedTrial>,
}

/// Random search: keep the standard `±π/2` box if it passes, otherwise draw
/// `q_l ~ U(q_l, q_u)`, `q_u ~ U(q_l^t, q_u)` per trial and keep the largest
/// (by diagonal 2-norm) candidate that passes [`check_inclusion_stream`].
pub fn find_constraint_set(cfg: &FinderConfig, geom: &ArmGeometry) -> Result<FinderReport> {
    cfg.validate()?;
    geom.validate()?;
    let n = geom.q_size();
    let standard = ConstraintBox::standard(n);
    if check_inclusion_stream(&standard, cfg, geom, 0) {
        return Ok(FinderReport { constraint_box: standard, standard: true, accepted: Vec::new() });
    }
    let mut best = ConstraintBox::zero(n);
    let mut best_size = 0.0;
    let mut accepted = Vec::new();
    for trial in 0..cfg.n_trials {
        let mut rng = rng_for(cfg.seed, 2 * trial as u64 + 1);
        let lower: Vec<f64> = (0..n).map(|i| uniform(&mut rng, standard.lower[i], standard.upper[i])).collect();
        let upper: Vec<f64> = (0..n).map(|i| uniform(&mut rng, lower[i], standard.upper[i])).collect();
        let candidate = ConstraintBox { lower, upper };
        let size = candidate.size();
        if size > best_size && check_inclusion_stream(&candidate, cfg, geom, 2 * trial as u64 + 2) {
            best_size = size;
            best = candidate.clone();
            accepted.push(AcceptedTrial { trial, candidate, size });
        }
    }
    if best_size == 0.0 {
        return Err(Error::NoFeasibleBox);
    }
    Ok(FinderReport { constraint_box: best, standard: false, accepted })
}
