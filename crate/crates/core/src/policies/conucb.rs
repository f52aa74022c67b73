use rand::RngCore;

use super::{Pending, Policy, PolicyKind};
use crate::confidence::{ucb_index, ConfidenceParams};
use crate::error::{Error, Result};
use crate::lp::{fallback_vector, solve_constrained_selection, LpResult};
use crate::rounding::dependent_rounding;
use crate::types::{ArmStatistics, PolicyVector, ProblemInstance, RoundOutcome, SelectionSet};

/// Constrained UCB.
///
/// Every round it solves the selection LP on the optimistic indices `(â, ĝ)`,
/// falls back to the top-`L` arms by `â` when the LP is infeasible, and rounds
/// the resulting vector into `L` arms.
#[derive(Debug, Clone)]
pub struct ConUcb {
    size: usize,
    threshold: f64,
    params: ConfidenceParams,
    stats: Vec<ArmStatistics>,
    a_hat: Vec<f64>,
    g_hat: Vec<f64>,
    round: u64,
    last_vector: Option<PolicyVector>,
    last_feasible: bool,
    pending: Pending,
}

impl ConUcb {
    /// Uses `γ = 72 ln(8KT/δ)` from the instance.
    pub fn new(instance: &ProblemInstance) -> Result<Self> {
        let params = ConfidenceParams::for_horizon(
            instance.num_arms(),
            instance.horizon(),
            instance.delta(),
        )?;
        Self::with_params(instance.num_arms(), instance.size(), instance.threshold(), params)
    }

    pub fn with_gamma(instance: &ProblemInstance, gamma: f64) -> Result<Self> {
        Self::with_params(
            instance.num_arms(),
            instance.size(),
            instance.threshold(),
            ConfidenceParams::new(gamma)?,
        )
    }

    pub fn with_params(
        num_arms: usize,
        size: usize,
        threshold: f64,
        params: ConfidenceParams,
    ) -> Result<Self> {
        if size == 0 || size > num_arms {
            return Err(Error::InvalidParameter(format!(
                "L = {size} must satisfy 1 <= L <= K = {num_arms}"
            )));
        }
        let stats = vec![ArmStatistics::new(); num_arms];
        let index = ucb_index(0.0, 0, params.gamma());
        Ok(Self {
            size,
            threshold,
            params,
            stats,
            a_hat: vec![index; num_arms],
            g_hat: vec![index; num_arms],
            round: 0,
            last_vector: None,
            last_feasible: true,
            pending: Pending::default(),
        })
    }

    pub fn params(&self) -> ConfidenceParams {
        self.params
    }

    pub fn statistics(&self) -> &[ArmStatistics] {
        &self.stats
    }

    /// Current first-level indices `â`.
    pub fn a_hat(&self) -> &[f64] {
        &self.a_hat
    }

    /// Current compound indices `ĝ`.
    pub fn g_hat(&self) -> &[f64] {
        &self.g_hat
    }

    /// Number of completed rounds.
    pub fn rounds_completed(&self) -> u64 {
        self.round
    }

    /// The vector chosen at the most recent `propose`.
    pub fn last_vector(&self) -> Option<&PolicyVector> {
        self.last_vector.as_ref()
    }

    /// Whether the most recent LP had a feasible point.
    pub fn last_feasible(&self) -> bool {
        self.last_feasible
    }

    /// Solves the LP on the current indices and rounds the solution.
    pub fn propose(&mut self, rng: &mut dyn RngCore) -> (PolicyVector, SelectionSet) {
        let lp = solve_constrained_selection(&self.g_hat, &self.a_hat, self.size, self.threshold)
            .expect("dimensions fixed at construction");
        let x = match lp {
            LpResult::Optimal { x, .. } => {
                self.last_feasible = true;
                x
            }
            LpResult::Infeasible => {
                self.last_feasible = false;
                fallback_vector(&self.a_hat, self.size).expect("L validated at construction")
            }
        };
        let selection = dependent_rounding(&x, rng);
        self.pending.set(&selection);
        self.last_vector = Some(x.clone());
        (x, selection)
    }
}

impl Policy for ConUcb {
    fn kind(&self) -> PolicyKind {
        PolicyKind::ConUcb
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> SelectionSet {
        self.propose(rng).1
    }

    fn update(&mut self, outcome: &RoundOutcome) -> Result<()> {
        self.pending.take_matching(outcome)?;
        let gamma = self.params.gamma();
        for (i, sample) in outcome.iter() {
            let s = &mut self.stats[i];
            s.update(sample);
            self.a_hat[i] = ucb_index(s.a_bar(), s.plays(), gamma);
            self.g_hat[i] = ucb_index(s.g_bar(), s.plays(), gamma);
        }
        self.round += 1;
        Ok(())
    }
}
