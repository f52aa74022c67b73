//! Domain types shared by the policies, the environment and the harness.

use crate::error::{Error, Result};

/// Additive tolerance on `Σ x_i = L` for a [`PolicyVector`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Ground-truth means of one arm's two-level reward.
///
/// The first level is the click-through rate of the link; the second level is
/// the after-click conversion rate. The environment is expected to draw the two
/// levels independently, so the compound mean is their product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmParams {
    a_mean: f64,
    b_mean: f64,
}

impl ArmParams {
    pub fn new(a_mean: f64, b_mean: f64) -> Result<Self> {
        for (name, v) in [("a_mean", a_mean), ("b_mean", b_mean)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        Ok(Self { a_mean, b_mean })
    }

    pub fn a_mean(&self) -> f64 {
        self.a_mean
    }

    pub fn b_mean(&self) -> f64 {
        self.b_mean
    }

    /// Mean compound reward `a · b`.
    pub fn g_mean(&self) -> f64 {
        self.a_mean * self.b_mean
    }
}

/// Compound reward of a single observation.
pub fn compound(a: f64, b: f64) -> f64 {
    a * b
}

/// A constrained multiple-play problem: pick `size` of the arms each round,
/// keeping the expected first-level total at or above `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    arms: Vec<ArmParams>,
    size: usize,
    threshold: f64,
    horizon: u64,
    delta: f64,
}

impl ProblemInstance {
    pub fn new(
        arms: Vec<ArmParams>,
        size: usize,
        threshold: f64,
        horizon: u64,
        delta: f64,
    ) -> Result<Self> {
        let k = arms.len();
        if size == 0 || size > k {
            return Err(Error::InvalidParameter(format!(
                "L = {size} must satisfy 1 <= L <= K = {k}"
            )));
        }
        if !(threshold > 0.0 && threshold < size as f64) {
            return Err(Error::InvalidParameter(format!(
                "h = {threshold} must satisfy 0 < h < L = {size}"
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter("T must be at least 1".into()));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {delta} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            arms,
            size,
            threshold,
            horizon,
            delta,
        })
    }

    pub fn arms(&self) -> &[ArmParams] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn a_means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmParams::a_mean).collect()
    }

    pub fn g_means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmParams::g_mean).collect()
    }
}

/// A point of the policy polytope `{0 <= x_i <= 1, Σ x_i = L}`: per-arm
/// selection probabilities of a randomized policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyVector {
    values: Vec<f64>,
    size: usize,
}

impl PolicyVector {
    /// Validates the box constraints and that the coordinates sum to an
    /// integer `L >= 1` within [`SUM_TOLERANCE`].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::MalformedPolicyVector("empty vector".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(-SUM_TOLERANCE..=1.0 + SUM_TOLERANCE).contains(*v))
        {
            return Err(Error::MalformedPolicyVector(format!(
                "x[{i}] = {v} is outside [0, 1]"
            )));
        }
        let sum: f64 = values.iter().sum();
        let size = sum.round();
        if (sum - size).abs() > SUM_TOLERANCE || size < 1.0 {
            return Err(Error::MalformedPolicyVector(format!(
                "coordinates sum to {sum}, not a positive integer"
            )));
        }
        Ok(Self {
            values,
            size: size as usize,
        })
    }

    /// Like [`PolicyVector::new`] but also checks the sum against an expected `L`.
    pub fn with_size(values: Vec<f64>, size: usize) -> Result<Self> {
        let x = Self::new(values)?;
        if x.size != size {
            return Err(Error::MalformedPolicyVector(format!(
                "coordinates sum to {}, expected L = {size}",
                x.sum()
            )));
        }
        Ok(x)
    }

    /// 0/1 indicator of `indices` over `k` arms.
    pub fn indicator(k: usize, indices: &[usize]) -> Result<Self> {
        let mut values = vec![0.0; k];
        for &i in indices {
            if i >= k || values[i] == 1.0 {
                return Err(Error::MalformedPolicyVector(format!(
                    "index {i} out of range or repeated"
                )));
            }
            values[i] = 1.0;
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The integer `L` the coordinates sum to.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.values.iter().zip(other).map(|(x, y)| x * y).sum()
    }

    /// Number of coordinates strictly inside (0, 1).
    pub fn fractional_count(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0 && v < 1.0).count()
    }
}

/// The integral set of exactly `L` distinct arm indices chosen in one round,
/// kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionSet {
    indices: Vec<usize>,
}

impl SelectionSet {
    pub fn new(mut indices: Vec<usize>, num_arms: usize, size: usize) -> Result<Self> {
        if indices.len() != size {
            return Err(Error::InvalidSelection(format!(
                "{} indices given, expected exactly {size}",
                indices.len()
            )));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSelection("repeated index".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= num_arms {
                return Err(Error::InvalidSelection(format!(
                    "index {last} out of range for K = {num_arms}"
                )));
            }
        }
        Ok(Self { indices })
    }

    /// Caller guarantees ascending, distinct indices.
    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// One observation of a selected arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSample {
    pub a: f64,
    pub b: f64,
    pub g: f64,
}

impl RewardSample {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            g: compound(a, b),
        }
    }
}

/// Rewards observed at round `round` for the arms of `selection` only.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    round: u64,
    selection: SelectionSet,
    samples: Vec<RewardSample>,
}

impl RoundOutcome {
    /// `samples[k]` belongs to `selection.indices()[k]`.
    pub fn new(round: u64, selection: SelectionSet, samples: Vec<RewardSample>) -> Result<Self> {
        if samples.len() != selection.len() {
            return Err(Error::DimensionMismatch {
                expected: selection.len(),
                actual: samples.len(),
            });
        }
        Ok(Self {
            round,
            selection,
            samples,
        })
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn selection(&self) -> &SelectionSet {
        &self.selection
    }

    pub fn samples(&self) -> &[RewardSample] {
        &self.samples
    }

    pub fn sample_for(&self, arm: usize) -> Option<&RewardSample> {
        self.selection
            .indices()
            .binary_search(&arm)
            .ok()
            .map(|k| &self.samples[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &RewardSample)> {
        self.selection.indices().iter().copied().zip(&self.samples)
    }

    pub fn total_a(&self) -> f64 {
        self.samples.iter().map(|s| s.a).sum()
    }

    pub fn total_g(&self) -> f64 {
        self.samples.iter().map(|s| s.g).sum()
    }
}

/// Per-arm running statistics.
///
/// Averages divide by `n + 1` rather than `n`, so an unplayed arm reads as 0
/// and every average stays below 1. Only the sums are stored; the averages are
/// derived on demand.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmStatistics {
    n: u64,
    sum_a: f64,
    sum_g: f64,
}

impl ArmStatistics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn plays(&self) -> u64 {
        self.n
    }

    pub fn a_bar(&self) -> f64 {
        self.sum_a / (self.n + 1) as f64
    }

    pub fn g_bar(&self) -> f64 {
        self.sum_g / (self.n + 1) as f64
    }

    pub fn update(&mut self, sample: &RewardSample) {
        self.n += 1;
        self.sum_a += sample.a;
        self.sum_g += sample.g;
    }

    #[must_use]
    pub fn updated(mut self, sample: &RewardSample) -> Self {
        self.update(sample);
        self
    }
}
