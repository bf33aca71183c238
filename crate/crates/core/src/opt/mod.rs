//! Numerical optimization: dense QP, Riccati gain and the sequential QP loop.

mod dare;
mod qp;
mod sqp;

pub use dare::{gain_or_zero, riccati_residual, solve_dare, spectral_radius, DareSolution, DARE_MAX_ITER, DARE_TOL};
pub use qp::{solve_qp, solve_qp_warm, ActiveConstraint, KktResiduals, QpProblem, QpSettings, QpSolution, QpStatus};
pub use sqp::{sqp_solve, LocalQp, SqpModel, SqpResult, SqpSettings, SqpStatus};
