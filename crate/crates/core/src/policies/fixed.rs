use rand::RngCore;

use super::{Pending, Policy, PolicyKind};
use crate::error::{Error, Result};
use crate::lp::{solve_constrained_selection, LpResult};
use crate::rounding::dependent_rounding;
use crate::types::{PolicyVector, ProblemInstance, RoundOutcome, SelectionSet};

/// The optimal stationary randomized policy `x*` for the true means.
pub fn oracle_policy(instance: &ProblemInstance) -> Result<PolicyVector> {
    let a = instance.a_means();
    let g = instance.g_means();
    match solve_constrained_selection(&g, &a, instance.size(), instance.threshold())? {
        LpResult::Optimal { x, .. } => Ok(x),
        LpResult::Infeasible => Err(Error::Infeasible(format!(
            "the {} most attractive arms sum to less than h = {}",
            instance.size(),
            instance.threshold()
        ))),
    }
}

/// Rounds a fixed vector every round.
#[derive(Debug, Clone)]
struct Stationary {
    x: PolicyVector,
    pending: Pending,
}

impl Stationary {
    fn select(&mut self, rng: &mut dyn RngCore) -> SelectionSet {
        let s = dependent_rounding(&self.x, rng);
        self.pending.set(&s);
        s
    }
}

/// Plays `x*` (computed from the true means) every round.
#[derive(Debug, Clone)]
pub struct OraclePolicy(Stationary);

impl OraclePolicy {
    pub fn new(instance: &ProblemInstance) -> Result<Self> {
        Ok(Self(Stationary {
            x: oracle_policy(instance)?,
            pending: Pending::default(),
        }))
    }

    pub fn vector(&self) -> &PolicyVector {
        &self.0.x
    }
}

impl Policy for OraclePolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Oracle
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> SelectionSet {
        self.0.select(rng)
    }

    fn update(&mut self, outcome: &RoundOutcome) -> Result<()> {
        self.0.pending.take_matching(outcome)
    }
}

/// Each arm with probability `L/K`.
#[derive(Debug, Clone)]
pub struct UniformPolicy(Stationary);

impl UniformPolicy {
    pub fn new(num_arms: usize, size: usize) -> Result<Self> {
        if size == 0 || size > num_arms {
            return Err(Error::InvalidParameter(format!(
                "L = {size} must satisfy 1 <= L <= K = {num_arms}"
            )));
        }
        let x = PolicyVector::with_size(vec![size as f64 / num_arms as f64; num_arms], size)?;
        Ok(Self(Stationary {
            x,
            pending: Pending::default(),
        }))
    }
}

impl Policy for UniformPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Uniform
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> SelectionSet {
        self.0.select(rng)
    }

    fn update(&mut self, outcome: &RoundOutcome) -> Result<()> {
        self.0.pending.take_matching(outcome)
    }
}
