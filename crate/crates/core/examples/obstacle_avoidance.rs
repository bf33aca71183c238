//! Penalized and soft-constrained controllers on the two-obstacle circle.

use std::path::PathBuf;

use softarm::sim::{load_scenario, run_scenario};

fn main() -> softarm::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for name in ["obstacle_penalized", "obstacle_soft"] {
        let scenario = load_scenario(&root.join(format!("{name}.toml")))?;
        let outcome = run_scenario(&scenario)?;
        let m = &outcome.metrics;
        println!(
            "{name}: RMSE {:.3e} m, min clearance {:.3e} m, max slack {:.3e}, mean solve {:.2} ms",
            m.rmse, m.min_clearance, m.max_slack_norm, m.mean_solve_ms
        );
        if let Some(b) = &outcome.constraint_box {
            println!("  box lower {:.3?}\n  box upper {:.3?}", b.lower, b.upper);
        }
    }
    Ok(())
}
