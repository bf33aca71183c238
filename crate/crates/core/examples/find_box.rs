//! Curvature box search with a half-space-like obstacle beside the arm.

use nalgebra::Vector3;
use softarm::arm::ArmGeometry;
use softarm::finder::{check_inclusion, find_constraint_set, FinderConfig, Sphere};
use softarm::sim::{box_to_toml, make_circle};

fn main() -> softarm::Result<()> {
    let geometry = ArmGeometry::default();
    let circle = make_circle(0.1, Vector3::new(0.0, 0.0, -0.27), 12.5, 1.0)?;
    let mut cfg = FinderConfig {
        n_trials: 500,
        n_samples: 2000,
        targets: (0..24).map(|i| circle.sample(12.5 * i as f64 / 24.0).into()).collect(),
        neighborhood: 0.03,
        threshold: 0.75,
        obstacles: Vec::new(),
        seed: 3,
    };
    let free = find_constraint_set(&cfg, &geometry)?;
    println!("free space: standard box kept = {}", free.standard);

    cfg.obstacles.push(Sphere { center: [10.12, 0.0, -0.27], radius: 10.0 });
    let report = find_constraint_set(&cfg, &geometry)?;
    println!("with obstacle: {} improving candidates, size {:.3}", report.accepted.len(), report.constraint_box.size());
    println!("passes inclusion: {}", check_inclusion(&report.constraint_box, &cfg, &geometry));
    print!("{}", box_to_toml(&report.constraint_box));
    Ok(())
}
