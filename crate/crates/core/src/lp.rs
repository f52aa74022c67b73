//! The per-round selection LP
//!
//! ```text
//! maximize    xᵀĝ
//! subject to  xᵀâ >= h,  0 <= x_i <= 1,  Σ x_i = L
//! ```
//!
//! solved exactly through its Lagrangian. For a multiplier `λ >= 0` the
//! relaxation without the threshold row is maximized by the top-`L` arms under
//! the score `ĝ_i + λ â_i`; the first-level total of that set grows with `λ`.
//! The optimum is at the smallest `λ` where the total reaches `h`, and there
//! the optimal point mixes two top-`L` sets that differ in a single swap, so
//! it has at most two fractional coordinates.
//!
//! `λ` is located by bisection with secant-style probes at the crossover of
//! the swapping pair. A probe is accepted once a Lagrangian certificate holds:
//! both bracketing sets attain the maximum score at the crossover.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::types::PolicyVector;

/// Slack allowed on `xᵀâ >= h`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const MAX_PROBES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { x: PolicyVector, objective: f64 },
    Infeasible,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpResult::Optimal { .. })
    }

    pub fn x(&self) -> Option<&PolicyVector> {
        match self {
            LpResult::Optimal { x, .. } => Some(x),
            LpResult::Infeasible => None,
        }
    }

    pub fn objective(&self) -> Option<f64> {
        match self {
            LpResult::Optimal { objective, .. } => Some(*objective),
            LpResult::Infeasible => None,
        }
    }
}

/// Indices of the `size` largest scores, ties to the lower index, ascending.
pub(crate) fn top_indices(scores: &[f64], size: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    if size < idx.len() {
        let by_score =
            |&i: &usize, &j: &usize| scores[j].total_cmp(&scores[i]).then(i.cmp(&j));
        idx.select_nth_unstable_by(size - 1, by_score);
        idx.truncate(size);
    }
    idx.sort_unstable();
    idx
}

fn top_sum(values: &[f64], size: usize) -> f64 {
    top_indices(values, size).iter().map(|&i| values[i]).sum()
}

fn check_dims(a_hat: &[f64], size: usize) -> Result<()> {
    let k = a_hat.len();
    if size == 0 || size > k {
        return Err(Error::InvalidParameter(format!(
            "L = {size} must satisfy 1 <= L <= K = {k}"
        )));
    }
    Ok(())
}

/// Whether some point of the polytope reaches `xᵀâ >= h`, i.e. whether the
/// `L` largest entries of `â` sum to at least `h` (within [`FEASIBILITY_TOL`]).
pub fn feasible(a_hat: &[f64], size: usize, threshold: f64) -> bool {
    if size == 0 || size > a_hat.len() {
        return false;
    }
    top_sum(a_hat, size) >= threshold - FEASIBILITY_TOL
}

/// The vertex with the largest first-level total: indicator of the top-`L`
/// arms by `â`. Used when the LP has no feasible point.
pub fn fallback_vector(a_hat: &[f64], size: usize) -> Result<PolicyVector> {
    check_dims(a_hat, size)?;
    PolicyVector::indicator(a_hat.len(), &top_indices(a_hat, size))
}

/// Solves the selection LP exactly.
pub fn solve_constrained_selection(
    g_hat: &[f64],
    a_hat: &[f64],
    size: usize,
    threshold: f64,
) -> Result<LpResult> {
    if g_hat.len() != a_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: a_hat.len(),
            actual: g_hat.len(),
        });
    }
    check_dims(a_hat, size)?;
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "h = {threshold} must be nonnegative"
        )));
    }
    Sweep::new(g_hat, a_hat, size, threshold).solve()
}

struct Sweep<'a> {
    g: &'a [f64],
    a: &'a [f64],
    size: usize,
    h: f64,
    scores: Vec<f64>,
}

impl<'a> Sweep<'a> {
    fn new(g: &'a [f64], a: &'a [f64], size: usize, h: f64) -> Self {
        Self {
            g,
            a,
            size,
            h,
            scores: vec![0.0; g.len()],
        }
    }

    fn top(&mut self, lambda: f64) -> Vec<usize> {
        for (s, (g, a)) in self.scores.iter_mut().zip(self.g.iter().zip(self.a)) {
            *s = g + lambda * a;
        }
        top_indices(&self.scores, self.size)
    }

    fn a_sum(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.a[i]).sum()
    }

    fn value(&self, set: &[usize], lambda: f64) -> f64 {
        set.iter().map(|&i| self.g[i] + lambda * self.a[i]).sum()
    }

    fn meets(&self, set: &[usize]) -> bool {
        self.a_sum(set) >= self.h - FEASIBILITY_TOL
    }

    fn integral(&self, set: &[usize]) -> Result<LpResult> {
        let x = PolicyVector::indicator(self.g.len(), set)?;
        let objective = x.dot(self.g);
        Ok(LpResult::Optimal { x, objective })
    }

    /// Point on the segment from `set` to `set - out + inc` whose first-level
    /// total equals `h`.
    fn mix(&self, set: &[usize], out: usize, inc: usize) -> Result<LpResult> {
        let base = self.a_sum(set);
        let step = self.a[inc] - self.a[out];
        let theta = ((self.h - base) / step).clamp(0.0, 1.0);
        let mut values = vec![0.0; self.g.len()];
        for &i in set {
            values[i] = 1.0;
        }
        values[out] = 1.0 - theta;
        values[inc] = theta;
        let x = PolicyVector::with_size(values, self.size)?;
        let objective = x.dot(self.g);
        Ok(LpResult::Optimal { x, objective })
    }

    fn solve(mut self) -> Result<LpResult> {
        let mut lo = 0.0;
        let mut s_lo = self.top(lo);
        if self.meets(&s_lo) {
            return self.integral(&s_lo);
        }
        if !feasible(self.a, self.size, self.h) {
            return Ok(LpResult::Infeasible);
        }

        let mut hi = 1.0;
        let mut s_hi = self.top(hi);
        while !self.meets(&s_hi) {
            hi *= 2.0;
            s_hi = self.top(hi);
            if hi > 1e300 {
                break;
            }
        }

        for _ in 0..MAX_PROBES {
            let (outs, ins) = set_difference(&s_lo, &s_hi);
            let mid = lo + 0.5 * (hi - lo);
            let mut probe = mid;
            if let ([out], [inc]) = (outs.as_slice(), ins.as_slice()) {
                let (out, inc) = (*out, *inc);
                let da = self.a[inc] - self.a[out];
                if da > 0.0 {
                    let crossing = (self.g[out] - self.g[inc]) / da;
                    if crossing >= lo && crossing <= hi {
                        let best_set = self.top(crossing);
                        let best = self.value(&best_set, crossing);
                        let here = self.value(&s_lo, crossing);
                        if here >= best - 1e-12 * (1.0 + best.abs()) {
                            return self.mix(&s_lo, out, inc);
                        }
                        if crossing > lo && crossing < hi {
                            probe = crossing;
                        }
                    }
                }
            }
            if hi - lo <= 1e-15 * (1.0 + hi) || !(probe > lo && probe < hi) {
                break;
            }
            let s = self.top(probe);
            if self.meets(&s) {
                hi = probe;
                s_hi = s;
            } else {
                lo = probe;
                s_lo = s;
            }
        }
        self.tie_walk(&s_lo, &s_hi)
    }

    /// `lo` and `hi` have met, so every set along a swap path from `s_lo` to
    /// `s_hi` is top-`L` at the common multiplier. Walk the path until the
    /// first-level total crosses `h`.
    fn tie_walk(&self, s_lo: &[usize], s_hi: &[usize]) -> Result<LpResult> {
        let (outs, ins) = set_difference(s_lo, s_hi);
        let mut set = s_lo.to_vec();
        let mut current = self.a_sum(&set);
        for (&out, &inc) in outs.iter().zip(&ins) {
            let next = current + self.a[inc] - self.a[out];
            if next >= self.h && next > current {
                return self.mix(&set, out, inc);
            }
            let pos = set.iter().position(|&i| i == out).expect("out is in set");
            set[pos] = inc;
            set.sort_unstable();
            current = next;
        }
        self.integral(s_hi)
    }
}

/// (`lo \ hi`, `hi \ lo`) for ascending index lists.
fn set_difference(lo: &[usize], hi: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let (mut outs, mut ins) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < lo.len() || j < hi.len() {
        match (lo.get(i), hi.get(j)) {
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                Ordering::Less => {
                    outs.push(*x);
                    i += 1;
                }
                Ordering::Greater => {
                    ins.push(*y);
                    j += 1;
                }
            },
            (Some(x), None) => {
                outs.push(*x);
                i += 1;
            }
            (None, Some(y)) => {
                ins.push(*y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    (outs, ins)
}
