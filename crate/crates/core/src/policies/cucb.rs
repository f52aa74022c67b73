use rand::RngCore;

use super::{Pending, Policy, PolicyKind};
use crate::error::{Error, Result};
use crate::lp::top_indices;
use crate::types::{ArmStatistics, RoundOutcome, SelectionSet};

/// CUCB index `ḡ + sqrt(3 ln t / (2N))`; an unplayed arm scores `+∞`.
pub fn cucb_index(g_bar: f64, plays: u64, round: f64) -> f64 {
    if plays == 0 {
        return f64::INFINITY;
    }
    g_bar + (3.0 * round.ln() / (2.0 * plays as f64)).sqrt()
}

/// Combinatorial UCB on the compound reward; ignores the threshold.
#[derive(Debug, Clone)]
pub struct Cucb {
    size: usize,
    stats: Vec<ArmStatistics>,
    scores: Vec<f64>,
    round: u64,
    pending: Pending,
}

impl Cucb {
    pub fn new(num_arms: usize, size: usize) -> Result<Self> {
        if size == 0 || size > num_arms {
            return Err(Error::InvalidParameter(format!(
                "L = {size} must satisfy 1 <= L <= K = {num_arms}"
            )));
        }
        Ok(Self {
            size,
            stats: vec![ArmStatistics::new(); num_arms],
            scores: vec![0.0; num_arms],
            round: 0,
            pending: Pending::default(),
        })
    }

    pub fn statistics(&self) -> &[ArmStatistics] {
        &self.stats
    }
}

impl Policy for Cucb {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Cucb
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> SelectionSet {
        let t = (self.round + 1) as f64;
        for (score, s) in self.scores.iter_mut().zip(&self.stats) {
            *score = cucb_index(s.g_bar(), s.plays(), t);
        }
        let selection = SelectionSet::from_sorted(top_indices(&self.scores, self.size));
        self.pending.set(&selection);
        selection
    }

    fn update(&mut self, outcome: &RoundOutcome) -> Result<()> {
        self.pending.take_matching(outcome)?;
        for (i, sample) in outcome.iter() {
            self.stats[i].update(sample);
        }
        self.round += 1;
        Ok(())
    }
}
