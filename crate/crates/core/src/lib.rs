//! Task-space tube MPC for pneumatically actuated soft continuum arms.
//!
//! The crate models a multi-segment arm under the piecewise-constant-curvature
//! assumption, computes its dynamics through an equivalent rigid chain,
//! linearizes and discretizes the model once per control loop, and solves a
//! constrained optimal-control problem over the end-effector trajectory. A
//! simulation bench (plant integrator, quasi-static baseline, scenario runner,
//! CSV logging) sits on top.
//!
//! Module map:
//!
//! * [`arm`]: curvature parametrization, forward kinematics, pressure maps.
//! * [`dynamics`]: augmented rigid chain, inertia/bias terms, plant acceleration.
//! * [`linearize`]: continuous state-space model and its discretization.
//! * [`opt`]: ADMM quadratic programming, Riccati solver, SQP outer loop.
//! * [`mpc`]: problem assembly, obstacle penalty, soft state constraints, tube feedback.
//! * [`finder`]: offline randomized search for a joint-space constraint box.
//! * [`sim`]: plant simulation, baselines, scenarios, metrics and logs.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arm;
pub mod dynamics;
pub mod error;
pub mod finder;
pub mod linearize;
pub mod mpc;
pub mod opt;
pub mod sim;

pub use error::{Error, Result};
