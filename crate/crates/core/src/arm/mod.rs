//! Piecewise-constant-curvature arm model.
//!
//! Each PCC section bends by a pair `(θx, θy)`, the Cartesian components of
//! the bending angle `θ` along the bending direction `φ`. The pair stays
//! regular in the straight configuration, where `(θ, φ)` is singular.

mod geometry;
mod kinematics;
mod pressure;

pub use geometry::{ArmGeometry, Curvature};
pub use kinematics::{
    chord_length, fk_jacobian, forward_kinematics, probe_points, theta_phi_to_xy,
    xy_to_theta_phi, ArmTaskMap, EePose, PolarCurvature, SegmentLength, TaskMap,
    CHORD_SERIES_EPS, FK_JACOBIAN_STEP,
};
pub use pressure::{chamber_to_pseudo, pseudo_to_chamber, ChamberPressure, PseudoPressure};
pub(crate) use kinematics::{rot_x, rot_y};
