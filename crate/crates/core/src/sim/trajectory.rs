use std::f64::consts::TAU;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// End-effector reference as a function of time (meters, world frame).
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryRef {
    /// Constant-height circle starting at `center + (radius, 0, 0)`.
    Circle { radius: f64, center: Vector3<f64>, period: f64, turns: f64 },
    /// Square of side `side` around `(center, height)`, traversed at constant
    /// speed starting from the `(+, +)` corner.
    Square { side: f64, center: [f64; 2], height: f64, period: f64 },
    Fixed(Vector3<f64>),
}

pub fn make_circle(radius: f64, center: Vector3<f64>, period: f64, turns: f64) -> Result<TrajectoryRef> {
    if !(radius > 0.0) || !(period > 0.0) || !(turns > 0.0) {
        return Err(Error::config("trajectory", "circle radius, period and turns must be positive"));
    }
    Ok(TrajectoryRef::Circle { radius, center, period, turns })
}

pub fn make_square(side: f64, center: [f64; 2], height: f64, period: f64) -> Result<TrajectoryRef> {
    if !(side > 0.0) || !(period > 0.0) {
        return Err(Error::config("trajectory", "square side and period must be positive"));
    }
    Ok(TrajectoryRef::Square { side, center, height, period })
}

impl TrajectoryRef {
    pub fn sample(&self, t: f64) -> Vector3<f64> {
        match *self {
            TrajectoryRef::Circle { radius, center, period, .. } => {
                let a = TAU * t / period;
                center + Vector3::new(radius * a.cos(), radius * a.sin(), 0.0)
            }
            TrajectoryRef::Square { side, center, height, period } => {
                let h = 0.5 * side;
                let corners = [[h, h], [-h, h], [-h, -h], [h, -h]];
                let phase = (t / period).rem_euclid(1.0) * 4.0;
                let edge = (phase.floor() as usize).min(3);
                let s = phase - edge as f64;
                let (a, b) = (corners[edge], corners[(edge + 1) % 4]);
                Vector3::new(
                    center[0] + a[0] + s * (b[0] - a[0]),
                    center[1] + a[1] + s * (b[1] - a[1]),
                    height,
                )
            }
            TrajectoryRef::Fixed(p) => p,
        }
    }

    /// `count` samples at `t, t + ts, …`.
    pub fn window(&self, t: f64, ts: f64, count: usize) -> Vec<Vector3<f64>> {
        (0..count).map(|k| self.sample(t + k as f64 * ts)).collect()
    }

    /// Natural length of the reference, if it has one.
    pub fn duration(&self) -> Option<f64> {
        match *self {
            TrajectoryRef::Circle { period, turns, .. } => Some(period * turns),
            _ => None,
        }
    }

    /// Times at which the reference passes a corner, within `[0, horizon]`.
    pub fn corner_times(&self, horizon: f64) -> Vec<f64> {
        match *self {
            TrajectoryRef::Square { period, .. } => {
                let quarter = period / 4.0;
                (0..).map(|i| i as f64 * quarter).take_while(|t| *t <= horizon + 1e-12).collect()
            }
            _ => Vec::new(),
        }
    }
}
