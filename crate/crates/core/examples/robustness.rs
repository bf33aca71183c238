//! Circle tracking with a mismatched, noisy plant, against the nominal run.

use std::path::PathBuf;

use softarm::sim::{load_scenario, run_scenario};

fn main() -> softarm::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let nominal = run_scenario(&load_scenario(&root.join("circle.toml"))?)?.metrics.rmse;
    println!("nominal RMSE {nominal:.3e} m");
    for p in [0.1, -0.1] {
        let mut scenario = load_scenario(&root.join("circle_robust.toml"))?;
        scenario.perturbation = p;
        let m = run_scenario(&scenario)?.metrics;
        println!("perturbation {p:+}: RMSE {:.3e} m ({:.2}x), tube clamp active in {} steps", m.rmse, m.rmse / nominal, m.clamp_active_steps);
    }
    Ok(())
}
