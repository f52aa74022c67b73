//! Cumulative regret, violation, reward and reward/violation ratio.
//!
//! Two violation measures are kept side by side. `vio_horizon` is the
//! positive part of the accumulated shortfall, `[h t - Σ_τ Σ_i a_i^τ]_+`, so a
//! surplus in one round can cancel a shortfall in another. `vio_clipped` sums
//! the per-round shortfalls `Σ_τ (h - Σ_i a_i^τ)_+` and never cancels.

use std::fmt;

/// Realized totals of one round: Σ a and Σ g over the selected arms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RoundTotals {
    pub a: f64,
    pub g: f64,
}

/// `t · optimal_value - Σ_{τ <= t} g_τ` where `per_round_g[τ-1]` holds the
/// compound reward collected at round τ.
pub fn cumulative_regret(per_round_g: &[f64], optimal_value: f64, t: usize) -> f64 {
    t as f64 * optimal_value - per_round_g[..t].iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub horizon: f64,
    pub clipped: f64,
}

/// Both violation measures over the first `t` rounds.
pub fn cumulative_violation(per_round_a: &[f64], threshold: f64, t: usize) -> Violation {
    let rounds = &per_round_a[..t];
    let total: f64 = rounds.iter().sum();
    Violation {
        horizon: (threshold * t as f64 - total).max(0.0),
        clipped: rounds.iter().map(|a| (threshold - a).max(0.0)).sum(),
    }
}

/// Reward per unit of (clipped) violation; undefined while nothing was violated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Undefined,
}

pub fn reward_violation_ratio(cum_reward: f64, cum_violation: f64) -> Ratio {
    if cum_violation > 0.0 {
        Ratio::Finite(cum_reward / cum_violation)
    } else {
        Ratio::Undefined
    }
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            Ratio::Undefined => None,
        }
    }

    /// `+∞` stands in for the undefined case.
    pub fn as_f64(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v}"),
            Ratio::Undefined => f.write_str("inf"),
        }
    }
}

/// One sampled row of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub cum_reward: f64,
    pub cum_regret: f64,
    pub vio_horizon: f64,
    pub vio_clipped: f64,
}

impl TraceRow {
    pub fn ratio(&self) -> Ratio {
        reward_violation_ratio(self.cum_reward, self.vio_clipped)
    }
}

/// Streaming accumulator for one run; emits a row every `stride` rounds and
/// at the final round.
#[derive(Debug, Clone)]
pub struct MetricsRecorder {
    optimal_value: f64,
    threshold: f64,
    stride: u64,
    horizon: u64,
    t: u64,
    cum_reward: f64,
    cum_a: f64,
    vio_clipped: f64,
    rows: Vec<TraceRow>,
}

impl MetricsRecorder {
    pub fn new(optimal_value: f64, threshold: f64, horizon: u64, stride: u64) -> Self {
        let stride = stride.max(1);
        Self {
            optimal_value,
            threshold,
            stride,
            horizon,
            t: 0,
            cum_reward: 0.0,
            cum_a: 0.0,
            vio_clipped: 0.0,
            rows: Vec::with_capacity((horizon / stride + 1) as usize),
        }
    }

    pub fn record(&mut self, totals: RoundTotals) {
        self.t += 1;
        self.cum_reward += totals.g;
        self.cum_a += totals.a;
        self.vio_clipped += (self.threshold - totals.a).max(0.0);
        if self.t.is_multiple_of(self.stride) || self.t == self.horizon {
            self.rows.push(self.current());
        }
    }

    pub fn current(&self) -> TraceRow {
        let t = self.t as f64;
        TraceRow {
            t: self.t,
            cum_reward: self.cum_reward,
            cum_regret: t * self.optimal_value - self.cum_reward,
            vio_horizon: (self.threshold * t - self.cum_a).max(0.0),
            vio_clipped: self.vio_clipped,
        }
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<TraceRow> {
        self.rows
    }
}

/// Sum of traces over runs, folded in run order; rows are aligned by position.
#[derive(Debug, Clone, Default)]
pub struct TraceAverage {
    sums: Vec<TraceRow>,
    runs: usize,
}

impl TraceAverage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, rows: &[TraceRow]) {
        if self.runs == 0 {
            self.sums = rows.to_vec();
        } else {
            assert_eq!(self.sums.len(), rows.len(), "traces sampled differently");
            for (s, r) in self.sums.iter_mut().zip(rows) {
                debug_assert_eq!(s.t, r.t);
                s.cum_reward += r.cum_reward;
                s.cum_regret += r.cum_regret;
                s.vio_horizon += r.vio_horizon;
                s.vio_clipped += r.vio_clipped;
            }
        }
        self.runs += 1;
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn mean(&self) -> Vec<TraceRow> {
        let n = self.runs.max(1) as f64;
        self.sums
            .iter()
            .map(|s| TraceRow {
                t: s.t,
                cum_reward: s.cum_reward / n,
                cum_regret: s.cum_regret / n,
                vio_horizon: s.vio_horizon / n,
                vio_clipped: s.vio_clipped / n,
            })
            .collect()
    }
}

/// `t · x*ᵀg` for `t = 1..=horizon`.
pub fn oracle_line(optimal_value: f64, horizon: u64) -> Vec<f64> {
    (1..=horizon).map(|t| t as f64 * optimal_value).collect()
}
