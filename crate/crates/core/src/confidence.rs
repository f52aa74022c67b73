//! Confidence radii and optimistic indices used by Con-UCB.

use crate::error::{Error, Result};
use crate::types::ArmStatistics;

/// Scale `γ` of the confidence radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams {
    gamma: f64,
}

impl ConfidenceParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} must be finite and at least 1"
            )));
        }
        Ok(Self { gamma })
    }

    /// `γ = 72 ln(8KT/δ)`, the value under which all indices are optimistic
    /// simultaneously with probability at least `1 - δ`.
    pub fn for_horizon(num_arms: usize, horizon: u64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {delta} must lie in (0, 1)"
            )));
        }
        let gamma = 72.0 * (8.0 * num_arms as f64 * horizon as f64 / delta).ln();
        Self::new(gamma)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// `R(μ, n) = sqrt(γμ/n) + γ/n`.
pub fn radius(mu: f64, n: f64, gamma: f64) -> f64 {
    (gamma * mu / n).sqrt() + gamma / n
}

/// `min{1, μ̄ + 2R(μ̄, N + 1)}` for an average over `plays` observations.
pub fn ucb_index(mean: f64, plays: u64, gamma: f64) -> f64 {
    (mean + 2.0 * radius(mean, (plays + 1) as f64, gamma)).min(1.0)
}

/// First-level and compound indices `(â, ĝ)` for every arm.
pub fn ucb_indices(stats: &[ArmStatistics], params: ConfidenceParams) -> (Vec<f64>, Vec<f64>) {
    let gamma = params.gamma();
    stats
        .iter()
        .map(|s| {
            (
                ucb_index(s.a_bar(), s.plays(), gamma),
                ucb_index(s.g_bar(), s.plays(), gamma),
            )
        })
        .unzip()
}
