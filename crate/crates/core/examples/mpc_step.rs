//! One controller step from rest toward a point off the hanging tip.

use nalgebra::{DVector, Vector3};
use softarm::arm::{ArmGeometry, SegmentLength};
use softarm::dynamics::DynamicsParams;
use softarm::mpc::{solve_controller_step, ControlModel, ControllerState, MpcConfig};

fn main() -> softarm::Result<()> {
    let geometry = ArmGeometry::default();
    let params = DynamicsParams::new(&geometry, 0.5, 0.05, &[0.004, 0.004]);
    let model = ControlModel::new(geometry, params, SegmentLength::Chord);
    let cfg = MpcConfig::new(4, 4);
    let mut ctrl = ControllerState::new(DVector::zeros(4), 4);
    let target = Vector3::new(0.03, -0.02, -0.285);
    let refs = vec![target; cfg.horizon + 1];
    let x = DVector::zeros(8);
    for k in 0..3 {
        let out = solve_controller_step(&x, &refs, &cfg, &model, &mut ctrl)?;
        let s = &out.solution;
        println!(
            "step {k}: status {}, {} SQP iterations, {:.2} ms, pressure {:.2?} kPa, clamped {}",
            s.status.as_str(),
            s.outer_iterations,
            s.solve_ms,
            out.pressure.0.as_slice(),
            out.clamped
        );
    }
    Ok(())
}
