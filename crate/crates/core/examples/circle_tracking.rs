//! Runs the shipped circle scenario and writes its log to the temp directory.

use std::path::PathBuf;

use softarm::sim::{export_csv, load_scenario, run_scenario};

fn main() -> softarm::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let scenario = load_scenario(&root.join("scenarios/circle.toml"))?;
    let outcome = run_scenario(&scenario)?;
    let m = &outcome.metrics;
    println!("{}: {} steps, RMSE {:.3e} m, max error {:.3e} m", scenario.name, m.steps, m.rmse, m.max_error);
    println!("solve time mean {:.2} ms, max {:.2} ms, {} deadline misses", m.mean_solve_ms, m.max_solve_ms, m.deadline_misses);
    let out = std::env::temp_dir().join("circle.csv");
    export_csv(&outcome.log, &out)?;
    println!("log written to {}", out.display());
    Ok(())
}
