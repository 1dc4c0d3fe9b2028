//! Quantum-annealing simulation laboratory for measuring when reading out the
//! state part-way through an anneal beats finishing it.
//!
//! The crate covers constrained problems (graph bipartitioning, quadratic
//! knapsack) encoded with an augmented Lagrangian, random and uniform Ising
//! models, exact full-space and symmetry-reduced dynamics, and the
//! experiment harness that drives them.

pub mod collective;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod numfmt;
pub mod rng;
pub mod spectrum;

pub use error::{Error, Result};
