//! End-effector position and Jacobian of the default two-segment arm, and the
//! chamber pressures that realize a pair of bending commands.

use nalgebra::DVector;
use softarm::arm::{fk_jacobian, forward_kinematics, pseudo_to_chamber, ArmGeometry, PseudoPressure, SegmentLength};

fn main() -> softarm::Result<()> {
    let geom = ArmGeometry::default();
    for q in [vec![0.0; 4], vec![0.5, 0.0, 0.0, 0.0], vec![0.4, -0.3, -0.6, 0.2]] {
        let q = DVector::from_vec(q);
        let pose = forward_kinematics(&q, &geom, SegmentLength::Chord)?;
        let rigid = forward_kinematics(&q, &geom, SegmentLength::Scaled(1.0))?;
        println!("q = {:?}", q.as_slice());
        println!("  tip (chord)      = {:.5?}", pose.position.as_slice());
        println!("  tip (rest links) = {:.5?}", rigid.position.as_slice());
        println!("  Jacobian = {:.4}", fk_jacobian(&q, &geom, SegmentLength::Chord)?);
    }
    let p = PseudoPressure(DVector::from_vec(vec![40.0, -25.0, 0.0, 60.0]));
    println!("pseudo {:?} kPa -> chambers {:.3?} kPa", p.0.as_slice(), pseudo_to_chamber(&p, &geom).0.as_slice());
    Ok(())
}
