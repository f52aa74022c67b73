use rand::RngCore;

use super::{Pending, Policy, PolicyKind};
use crate::error::{Error, Result};
use crate::rounding::dependent_rounding;
use crate::types::{PolicyVector, RoundOutcome, SelectionSet};

/// Exploration rate `min{1, sqrt(K ln(K/L) / ((e - 1) L T))}`.
pub fn default_exploration_rate(num_arms: usize, size: usize, horizon: u64) -> f64 {
    let (k, l, t) = (num_arms as f64, size as f64, horizon as f64);
    let rate = (k * (k / l).ln() / ((std::f64::consts::E - 1.0) * l * t)).sqrt();
    rate.min(1.0)
}

/// Exponential weights for multiple plays on the compound reward.
///
/// Weights are kept in log space and shifted so the largest is 0; only ratios
/// matter. Before each draw, weights large enough to push an arm's
/// probability above 1 are capped at a common level `α`, chosen so that the
/// capped arms get probability exactly 1. Capped arms are not updated.
#[derive(Debug, Clone)]
pub struct Exp3M {
    size: usize,
    gamma: f64,
    log_weights: Vec<f64>,
    capped: Vec<bool>,
    probs: Vec<f64>,
    pending: Pending,
}

impl Exp3M {
    pub fn new(num_arms: usize, size: usize, gamma: f64) -> Result<Self> {
        if size == 0 || size > num_arms {
            return Err(Error::InvalidParameter(format!(
                "L = {size} must satisfy 1 <= L <= K = {num_arms}"
            )));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "exploration rate {gamma} must lie in [0, 1]"
            )));
        }
        Ok(Self {
            size,
            gamma,
            log_weights: vec![0.0; num_arms],
            capped: vec![false; num_arms],
            probs: vec![size as f64 / num_arms as f64; num_arms],
            pending: Pending::default(),
        })
    }

    pub fn for_horizon(num_arms: usize, size: usize, horizon: u64) -> Result<Self> {
        Self::new(num_arms, size, default_exploration_rate(num_arms, size, horizon))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Starts from the given weights instead of all ones.
    pub fn with_weights(mut self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.log_weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.log_weights.len(),
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        self.log_weights = weights.iter().map(|w| w.ln()).collect();
        self.normalize();
        Ok(self)
    }

    fn normalize(&mut self) {
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for w in &mut self.log_weights {
            *w -= max;
        }
    }

    /// Selection probabilities `p_i = L((1-γ) w'_i / Σw' + γ/K)`.
    pub fn probabilities(&mut self) -> PolicyVector {
        let k = self.log_weights.len();
        let (l, kf) = (self.size as f64, k as f64);
        self.capped.iter_mut().for_each(|c| *c = false);

        if self.size == k {
            self.capped.iter_mut().for_each(|c| *c = true);
            self.probs.iter_mut().for_each(|p| *p = 1.0);
            return PolicyVector::with_size(self.probs.clone(), self.size)
                .expect("all-ones vector");
        }

        let mut w: Vec<f64> = self.log_weights.iter().map(|lw| lw.exp()).collect();
        let total: f64 = w.iter().sum();
        let share = (1.0 / l - self.gamma / kf) / (1.0 - self.gamma);
        if self.gamma < 1.0 && w.iter().copied().fold(0.0, f64::max) >= share * total {
            if let Some(alpha) = cap_level(&w, share) {
                for (wi, c) in w.iter_mut().zip(&mut self.capped) {
                    if *wi >= alpha {
                        *wi = alpha;
                        *c = true;
                    }
                }
            }
        }
        let total: f64 = w.iter().sum();
        for (p, wi) in self.probs.iter_mut().zip(&w) {
            *p = (l * ((1.0 - self.gamma) * wi / total + self.gamma / kf)).min(1.0);
        }
        PolicyVector::with_size(self.probs.clone(), self.size)
            .expect("probabilities sum to L by construction")
    }
}

/// Solves `α / (|S| α + Σ_{i∉S} w_i) = share` with `S = {i : w_i >= α}` by
/// scanning candidate set sizes over the weights sorted in decreasing order.
fn cap_level(w: &[f64], share: f64) -> Option<f64> {
    let mut sorted = w.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    // Tail sums are accumulated from the small end to avoid cancellation.
    let mut tail = vec![0.0; sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        tail[i] = tail[i + 1] + sorted[i];
    }
    for top in 1..sorted.len() {
        let rest = tail[top];
        let denom = 1.0 - share * top as f64;
        if denom <= 0.0 {
            break;
        }
        let alpha = share * rest / denom;
        if alpha <= sorted[top - 1] && alpha > sorted[top] {
            return Some(alpha);
        }
    }
    None
}

impl Policy for Exp3M {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Exp3M
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> SelectionSet {
        let p = self.probabilities();
        let selection = dependent_rounding(&p, rng);
        self.pending.set(&selection);
        selection
    }

    fn update(&mut self, outcome: &RoundOutcome) -> Result<()> {
        self.pending.take_matching(outcome)?;
        let k = self.log_weights.len() as f64;
        let rate = self.size as f64 * self.gamma / k;
        for (i, sample) in outcome.iter() {
            if !self.capped[i] {
                self.log_weights[i] += rate * sample.g / self.probs[i];
            }
        }
        self.normalize();
        Ok(())
    }
}
