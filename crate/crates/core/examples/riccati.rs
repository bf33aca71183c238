//! Tube feedback gain from the discrete Riccati equation at the hanging pose.

use nalgebra::{DMatrix, DVector};
use softarm::arm::{ArmGeometry, SegmentLength};
use softarm::dynamics::DynamicsParams;
use softarm::mpc::{ControlModel, MpcConfig};
use softarm::opt::{solve_dare, spectral_radius};

fn main() -> softarm::Result<()> {
    let one = DMatrix::from_element(1, 1, 1.0);
    let s = solve_dare(&one, &one, &one, &one)?;
    println!("scalar case: P = {:.12} (golden ratio {:.12})", s.p[(0, 0)], (1.0 + 5f64.sqrt()) / 2.0);

    let geometry = ArmGeometry::default();
    let params = DynamicsParams::new(&geometry, 0.5, 0.05, &[0.004, 0.004]);
    let cfg = MpcConfig::new(4, 4);
    let model = ControlModel::new(geometry, params, SegmentLength::Chord);
    let d = model.linearize(&DVector::zeros(8), &cfg)?;
    let sol = solve_dare(&d.a, &d.b, &cfg.dare_q, &cfg.dare_r)?;
    println!("open-loop radius {:.6}, closed-loop radius {:.6}", spectral_radius(&d.a), sol.closed_loop_radius);
    println!("K = {:.3}", sol.k);
    println!("relative residual {:.2e} after {} doublings", sol.residual, sol.iterations);
    Ok(())
}
