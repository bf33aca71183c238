//! Releases the bent arm with no pressure and prints how its energy decays.

use nalgebra::DVector;
use softarm::arm::ArmGeometry;
use softarm::dynamics::{mechanical_energy, DynamicsParams};
use softarm::sim::{Plant, PlantOptions, PlantState};

fn main() -> softarm::Result<()> {
    let geometry = ArmGeometry::default();
    let params = DynamicsParams::new(&geometry, 0.5, 0.05, &[0.004, 0.004]);
    let plant = Plant { geometry: geometry.clone(), params: params.clone(), options: PlantOptions::default() };
    let mut state = PlantState { q: DVector::from_vec(vec![0.8, 0.0, -0.4, 0.3]), ..PlantState::at_rest(4, 4) };
    let zero = DVector::zeros(4);
    println!("{:>5} {:>10} {:>10} {:>12}", "t", "q_0", "q_2", "energy_J");
    for k in 0..=20 {
        let e = mechanical_energy(&state.q, &state.qd, &geometry, &params);
        println!("{:>5.2} {:>10.5} {:>10.5} {:>12.6e}", k as f64 * 0.05, state.q[0], state.q[2], e.total());
        state = plant.step(&state, &zero, 0.05)?;
    }
    Ok(())
}
