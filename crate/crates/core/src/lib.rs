//! Numerics for norm-sensitive Dirichlet improvability in the plane.
//!
//! The crate computes critical determinants of planar norms, shortest
//! vectors and the normalized systole `δ_ν` of lattices, the Dani
//! correspondence between approximation functions and target radii,
//! diagonal-flow trajectories on the space of unimodular lattices, and the
//! reduction theory of the modular group on the upper half-plane.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha;
pub mod critical;
pub mod dani;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod hyperbolic;
pub mod lattice;
pub mod mat2;
pub mod norms;
pub mod numfmt;

pub use error::{Error, Result};
pub use lattice::{Lattice, ShortestVectorResult};
pub use norms::{NormDescriptor, NormSpec};
