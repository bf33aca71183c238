//! Simulation bench: ground-truth plant, quasi-static baseline, reference
//! trajectories, scenario files, the closed-loop runner and CSV logs.

mod baseline;
mod csv;
mod plant;
mod runner;
mod scenario;
mod trajectory;

pub use baseline::{damped_pseudo_inverse_step, inverse_kinematics, quasi_static_step, static_pressure, QuasiStaticGains};
pub use csv::{csv_header, export_csv, read_csv, write_csv};
pub use plant::{plant_step, Plant, PlantOptions, PlantState};
pub use runner::{
    applied_pseudo, compute_metrics, controller_config, run_scenario, tune_quasi_static, Metrics, RunOutcome, SimLog, StepRecord, TuningPoint,
};
pub use scenario::{
    box_to_toml, load_scenario, parse_finder_file, parse_override_value, parse_scenario, parse_scenario_file, parse_scenario_with_overrides, set_path,
    ArmSection, BaselineSection, ControllerKind, FinderFile, FinderJob, FinderSection, InitialState, MpcSection, PlantSection, Scenario,
    ScenarioFile, TrajectorySection, Values,
};
pub use trajectory::{make_circle, make_square, TrajectoryRef};
