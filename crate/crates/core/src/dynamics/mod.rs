//! Augmented rigid-body dynamics of the PCC arm.
//!
//! Every PCC section is replaced by five joints (half bend about y, half bend
//! about x, a prismatic chord, and the second half bend). Inertia and bias
//! terms are computed on that rigid chain and pulled back to curvature space
//! through the mapping Jacobian.

mod chain;
mod mapping;
mod spatial;
mod terms;

pub use chain::{AugmentedChain, JointKind, JointSpaceTerms};
pub use mapping::{map_to_augmented, mapping_jacobian, mapping_jacobian_dot_qd};
pub use terms::{
    dynamics_terms, joint_space_terms, mechanical_energy, plant_accel, DynamicsParams,
    DynamicsTerms, Energy,
};
