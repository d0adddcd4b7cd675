//! Self-contained solvers used by the learners.

pub mod gf2;
pub mod lp;

pub use gf2::{gf2_solve, Gf2Outcome, Gf2System};
pub use lp::{lp_feasible, InfeasibilityWitness, IntervalPathLP, LpOutcome, PathConstraint};
