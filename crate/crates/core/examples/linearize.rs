//! Continuous and discrete affine models of the arm at one state, compared
//! against the nonlinear plant over a single sample.

use nalgebra::DVector;
use softarm::arm::ArmGeometry;
use softarm::dynamics::{dynamics_terms, DynamicsParams};
use softarm::linearize::{continuous_ss, discretize, DriftHold};
use softarm::sim::{Plant, PlantOptions, PlantState};

fn main() -> softarm::Result<()> {
    let geometry = ArmGeometry::default();
    let params = DynamicsParams::new(&geometry, 0.5, 0.05, &[0.004, 0.004]);
    let q = DVector::from_vec(vec![0.3, -0.2, 0.1, 0.4]);
    let qd = DVector::zeros(4);
    let ss = continuous_ss(&dynamics_terms(&q, &qd, &geometry, &params)?)?;
    println!("continuous A = {:.3}", ss.a);
    let p = DVector::from_vec(vec![20.0, 0.0, 0.0, -10.0]);
    let plant = Plant { geometry, params, options: PlantOptions::default() };
    let truth = plant.step(&PlantState { q: q.clone(), qd: qd.clone(), p_eff: DVector::zeros(4) }, &p, 1.0 / 15.0)?;
    let mut x = DVector::zeros(8);
    x.rows_mut(0, 4).copy_from(&q);
    for drift in [DriftHold::Euler, DriftHold::Exact] {
        let d = discretize(&ss, 1.0 / 15.0, drift)?;
        let next = d.step(&x, &p);
        println!("{drift:?}: predicted q = {:.5?}, plant q = {:.5?}", next.rows(0, 4).as_slice(), truth.q.as_slice());
    }
    Ok(())
}
