//! Constrained multiple-play bandits with two-level rewards.
//!
//! Each arm yields an attractiveness reward `a` and a follow-up reward `b`
//! that is only realized when `a = 1`; the learner picks `L` of `K` arms per
//! round, maximizes the compound reward `g = a·b`, and keeps the expected
//! total attractiveness of its selection at least `h`.
//!
//! [`policies::ConUcb`] solves a small linear program over optimistic
//! estimates each round and rounds its solution with
//! [`rounding::dependent_rounding`]. [`harness`] runs repeated experiments
//! against baselines and writes averaged traces.

pub mod confidence;
pub mod env;
pub mod error;
pub mod harness;
pub mod lp;
pub mod metrics;
pub mod policies;
pub mod rounding;
pub mod types;

#[cfg(test)]
mod testing;

pub use error::{Error, ErrorCategory, Result};
pub use types::{
    compound, ArmParams, ArmStatistics, PolicyVector, ProblemInstance, RewardSample, RoundOutcome,
    SelectionSet,
};
