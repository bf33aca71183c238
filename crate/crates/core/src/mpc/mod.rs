//! Robust tube MPC: nominal tracking problem, obstacle penalty, soft state
//! set and the clamped tube feedback applied after optimization.

mod config;
mod controller;
mod problem;

pub use config::{BoundSteps, Initialization, MpcConfig, ObstaclePenalty, SoftSet};
pub use controller::{
    solve_controller_step, tube_feedback, tube_nominal, ControlModel, ControllerState, MpcSolution, SolveStatus, StepOutput,
};
pub use problem::{add_obstacle_penalty, build_problem, soften_state_constraints, MpcInstance, Trajectory, WarmStart};
