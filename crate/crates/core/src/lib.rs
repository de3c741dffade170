//! Configuration estimation for articulated robots from joint encoders and
//! binary contact sensors.
//!
//! The crate provides a voxel signed distance field ([`sdf`]), serial-chain
//! kinematics ([`kinematics`]), projection onto and sampling from the
//! contact manifold ([`manifold`]), conventional and manifold particle
//! filters over the encoder offset ([`filter`]), and a ground-truth
//! simulator with a benchmark harness ([`scenario`]).

// Validation negates comparisons on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clock;
pub mod filter;
pub mod kinematics;
pub mod manifold;
pub mod rng;
pub mod scenario;
pub mod sdf;
pub mod stats;
pub mod world;
