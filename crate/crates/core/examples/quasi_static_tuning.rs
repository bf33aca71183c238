//! Grid search over the quasi-static baseline gains on the slow circle.

use std::path::PathBuf;

use softarm::sim::{load_scenario, tune_quasi_static};

fn main() -> softarm::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/circle_quasi_static.toml");
    let mut scenario = load_scenario(&path)?;
    scenario.duration = 25.0;
    let (grid, best) = tune_quasi_static(&scenario, &[0.5, 1.0, 2.0, 3.0, 4.0], &[0.003, 0.01, 0.03])?;
    println!("{:>6} {:>8} {:>12} {:>8}", "gain", "damping", "rmse_m", "aborted");
    for p in &grid {
        println!("{:>6} {:>8} {:>12.4e} {:>8}", p.gains.gain, p.gains.damping, p.metrics.rmse, p.aborted);
    }
    if let Some(i) = best {
        println!("best: gain {}, damping {}", grid[i].gains.gain, grid[i].gains.damping);
    }
    Ok(())
}
