//! Tree Ising models observed only at their leaves: exact leaf
//! distributions, sampling, correlation estimation, learning with known and
//! unknown topology, identity testing, and topology interpolation.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod correlation;
pub mod distribution;
pub mod error;
pub mod estimation;
pub mod forest;
pub mod identity;
pub mod interpolation;
pub mod learn_known;
pub mod learn_unknown;
pub mod random;
pub mod reconstruct;
pub mod sampling;
pub mod solvers;
pub mod tree;

pub use correlation::CorrelationVector;
pub use error::{Error, Result};
pub use forest::WeightedForest;
pub use sampling::SampleMatrix;
pub use tree::{TreeTopology, WeightedTree};
