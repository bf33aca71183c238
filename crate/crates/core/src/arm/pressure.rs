use nalgebra::{DVector, Matrix2, Vector2};

use super::ArmGeometry;
use crate::error::{Error, Result};

/// Two signed, orthogonal bending commands per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPressure(pub DVector<f64>);

/// Three non-negative chamber pressures per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChamberPressure(pub DVector<f64>);

impl PseudoPressure {
    pub fn zeros(n_segments: usize) -> Self {
        PseudoPressure(DVector::zeros(2 * n_segments))
    }
}

impl ChamberPressure {
    pub fn zeros(n_segments: usize) -> Self {
        ChamberPressure(DVector::zeros(3 * n_segments))
    }
}

/// Direction along which adding pressure to all chambers produces no bending
/// moment, normalized to sum to 3 (so `(1, 1, 1)` for symmetric chambers).
/// `None` when the chambers do not surround the axis.
pub(crate) fn common_mode(angles: &[f64; 3]) -> Option<[f64; 3]> {
    let n = [
        (angles[2] - angles[1]).sin(),
        (angles[0] - angles[2]).sin(),
        (angles[1] - angles[0]).sin(),
    ];
    let sign = n[0].signum();
    if n.iter().any(|v| v.signum() != sign || v.abs() < 1e-9) {
        return None;
    }
    let sum: f64 = n.iter().sum();
    Some(n.map(|v| 3.0 * v / sum))
}

/// Reconstructs chamber pressures from pseudo-pressures.
///
/// The minimum-norm chamber vector reproducing `(px, py)` is shifted along the
/// moment-free common mode until every chamber is non-negative.
pub fn pseudo_to_chamber(p: &PseudoPressure, geom: &ArmGeometry) -> ChamberPressure {
    let mut out = DVector::zeros(3 * geom.n_segments);
    for s in 0..geom.n_segments {
        let angles = &geom.chamber_angles[s];
        let (cos, sin) = (angles.map(f64::cos), angles.map(f64::sin));
        let gram = Matrix2::new(
            cos.iter().map(|c| c * c).sum(),
            cos.iter().zip(&sin).map(|(c, s)| c * s).sum(),
            cos.iter().zip(&sin).map(|(c, s)| c * s).sum(),
            sin.iter().map(|s| s * s).sum(),
        );
        let w = gram
            .try_inverse()
            .expect("validated chamber layout has a full-rank moment map")
            * Vector2::new(p.0[2 * s], p.0[2 * s + 1]);
        let raw: [f64; 3] = std::array::from_fn(|i| cos[i] * w[0] + sin[i] * w[1]);
        let mode = common_mode(angles).unwrap_or([1.0; 3]);
        let shift = (0..3).map(|i| -raw[i] / mode[i]).fold(0.0_f64, f64::max);
        for i in 0..3 {
            out[3 * s + i] = (raw[i] + shift * mode[i]).max(0.0);
        }
    }
    ChamberPressure(out)
}

/// Projects chamber pressures onto the two bending directions.
pub fn chamber_to_pseudo(p: &ChamberPressure, geom: &ArmGeometry) -> Result<PseudoPressure> {
    if let Some((index, &value)) = p.0.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativePressure { index, value });
    }
    let mut out = DVector::zeros(2 * geom.n_segments);
    for s in 0..geom.n_segments {
        for (i, a) in geom.chamber_angles[s].iter().enumerate() {
            out[2 * s] += p.0[3 * s + i] * a.cos();
            out[2 * s + 1] += p.0[3 * s + i] * a.sin();
        }
    }
    Ok(PseudoPressure(out))
}
