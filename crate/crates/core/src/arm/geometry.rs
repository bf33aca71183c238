use std::f64::consts::PI;

use nalgebra::{DVector, Isometry3, Vector3};

use crate::error::{Error, Result};

/// Static description of the arm: lengths, chambers, masses and mounting.
///
/// Rest-arm axis is local `+z`. Positions returned by the kinematics are in
/// the world frame, i.e. after applying `base_frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmGeometry {
    pub n_segments: usize,
    pub pcc_per_segment: usize,
    /// Rest length `l0` of each segment, meters.
    pub segment_rest_length: Vec<f64>,
    /// Rigid connector mounted after each segment, meters, in the local frame
    /// at the segment tip.
    pub connector_offset: Vec<Vector3<f64>>,
    /// Angular position of the three chambers of each segment, radians.
    pub chamber_angles: Vec<[f64; 3]>,
    /// Mass of each soft segment, kg.
    pub segment_mass: Vec<f64>,
    /// Point mass of each connector, kg.
    pub connector_mass: Vec<f64>,
    /// Cross-section radius used for the rod inertia of a section, meters.
    pub segment_radius: f64,
    /// Gravity in the world frame, m/s².
    pub gravity: Vector3<f64>,
    pub base_frame: Isometry3<f64>,
}

impl Default for ArmGeometry {
    /// Two segments of 12.5 cm with 2 cm connectors, hanging from a base whose
    /// `+z` axis points down (world gravity along `-z`).
    fn default() -> Self {
        let symmetric = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        ArmGeometry {
            n_segments: 2,
            pcc_per_segment: 1,
            segment_rest_length: vec![0.125, 0.125],
            connector_offset: vec![Vector3::new(0.0, 0.0, 0.02); 2],
            chamber_angles: vec![symmetric; 2],
            segment_mass: vec![0.1, 0.1],
            connector_mass: vec![0.02, 0.02],
            segment_radius: 0.015,
            gravity: Vector3::new(0.0, 0.0, -9.81),
            base_frame: Isometry3::rotation(Vector3::new(PI, 0.0, 0.0)),
        }
    }
}

impl ArmGeometry {
    /// Number of curvature coordinates, `2 · n_segments · pcc_per_segment`.
    pub fn q_size(&self) -> usize {
        2 * self.n_sections()
    }

    pub fn n_sections(&self) -> usize {
        self.n_segments * self.pcc_per_segment
    }

    /// Number of pseudo-pressure channels, two per segment.
    pub fn n_inputs(&self) -> usize {
        2 * self.n_segments
    }

    /// Rest length of one PCC section.
    pub fn section_rest_length(&self, section: usize) -> f64 {
        self.segment_rest_length[section / self.pcc_per_segment] / self.pcc_per_segment as f64
    }

    pub fn section_mass(&self, section: usize) -> f64 {
        self.segment_mass[section / self.pcc_per_segment] / self.pcc_per_segment as f64
    }

    pub fn total_rest_length(&self) -> f64 {
        self.segment_rest_length.iter().sum::<f64>()
            + self.connector_offset.iter().map(|c| c.norm()).sum::<f64>()
    }

    /// Gravity expressed in the base frame.
    pub fn gravity_in_base(&self) -> Vector3<f64> {
        self.base_frame.rotation.inverse() * self.gravity
    }

    /// Returns a copy with all masses scaled by `factor`.
    pub fn with_mass_scale(&self, factor: f64) -> Self {
        let mut g = self.clone();
        g.segment_mass.iter_mut().for_each(|m| *m *= factor);
        g.connector_mass.iter_mut().for_each(|m| *m *= factor);
        g
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_segments == 0 || self.pcc_per_segment == 0 {
            return Err(Error::config("geometry", "n_segments and pcc_per_segment must be >= 1"));
        }
        let n = self.n_segments;
        let per_segment = [
            ("segment_rest_length", self.segment_rest_length.len()),
            ("connector_offset", self.connector_offset.len()),
            ("chamber_angles", self.chamber_angles.len()),
            ("segment_mass", self.segment_mass.len()),
            ("connector_mass", self.connector_mass.len()),
        ];
        for (name, len) in per_segment {
            if len != n {
                return Err(Error::config(
                    format!("geometry.{name}"),
                    format!("expected {n} entries, found {len}"),
                ));
            }
        }
        for (i, l) in self.segment_rest_length.iter().enumerate() {
            if !(l.is_finite() && *l > 0.0) {
                return Err(Error::config(
                    format!("geometry.segment_rest_length[{i}]"),
                    "must be strictly positive",
                ));
            }
        }
        for (i, c) in self.connector_offset.iter().enumerate() {
            if !c.iter().all(|v| v.is_finite()) {
                return Err(Error::config(format!("geometry.connector_offset[{i}]"), "must be finite"));
            }
        }
        for (i, m) in self.segment_mass.iter().enumerate() {
            if !(m.is_finite() && *m > 0.0) {
                return Err(Error::config(format!("geometry.segment_mass[{i}]"), "must be strictly positive"));
            }
        }
        for (i, m) in self.connector_mass.iter().enumerate() {
            if !(m.is_finite() && *m >= 0.0) {
                return Err(Error::config(format!("geometry.connector_mass[{i}]"), "must be non-negative"));
            }
        }
        if !(self.segment_radius.is_finite() && self.segment_radius > 0.0) {
            return Err(Error::config("geometry.segment_radius", "must be strictly positive"));
        }
        for (s, angles) in self.chamber_angles.iter().enumerate() {
            for a in 0..3 {
                for b in (a + 1)..3 {
                    let d = (angles[a] - angles[b]).rem_euclid(2.0 * PI);
                    if d < 1e-9 || 2.0 * PI - d < 1e-9 {
                        return Err(Error::config(
                            format!("geometry.chamber_angles[{s}]"),
                            "chamber angles must be pairwise distinct modulo 2π",
                        ));
                    }
                }
            }
            if super::pressure::common_mode(angles).is_none() {
                return Err(Error::config(
                    format!("geometry.chamber_angles[{s}]"),
                    "chambers must surround the arm axis",
                ));
            }
        }
        if !self.gravity.iter().all(|v| v.is_finite()) {
            return Err(Error::config("geometry.gravity", "must be finite"));
        }
        Ok(())
    }
}

/// Curvature state: one `(θx, θy)` pair per PCC section, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvature(DVector<f64>);

impl Curvature {
    /// Default workspace guard on the per-section bending angle.
    pub const DEFAULT_GUARD: f64 = PI;

    pub fn new(values: DVector<f64>) -> Result<Self> {
        Self::with_guard(values, Self::DEFAULT_GUARD)
    }

    /// Validates finiteness, even length and `|θ| ≤ guard` for every section.
    pub fn with_guard(values: DVector<f64>, guard: f64) -> Result<Self> {
        if !values.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "curvature vector must have even length, got {}",
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput("curvature"));
        }
        for s in 0..values.len() / 2 {
            let theta = values[2 * s].hypot(values[2 * s + 1]);
            if theta > guard {
                return Err(Error::config(
                    format!("curvature[{s}]"),
                    format!("bending angle {theta} exceeds workspace guard {guard}"),
                ));
            }
        }
        Ok(Curvature(values))
    }

    pub fn zeros(q_size: usize) -> Self {
        Curvature(DVector::zeros(q_size))
    }

    pub fn section(&self, s: usize) -> (f64, f64) {
        (self.0[2 * s], self.0[2 * s + 1])
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}
