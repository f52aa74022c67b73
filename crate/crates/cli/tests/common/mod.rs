//! Reference computations shared by the integration suites. Nothing here
//! calls into the solver or rounding code it is used to check.
#![allow(dead_code)]

use rand::Rng;

/// Exhaustive LP optimum over the vertices of
/// `{x ∈ [0,1]^K : Σx = L, aᵀx ≥ h}`: every vertex has all coordinates
/// integral, or exactly two fractional ones that sum to 1.
pub fn vertex_lp(g: &[f64], a: &[f64], l: usize, h: f64) -> Option<f64> {
    let k = g.len();
    assert!(k <= 16);
    let tol = 1e-12;
    let mut best: Option<f64> = None;
    let mut consider = |v: f64| best = Some(best.map_or(v, |b: f64| b.max(v)));
    for mask in 0u32..(1 << k) {
        let ones = mask.count_ones() as usize;
        let (sa, sg) = (0..k).filter(|i| mask >> i & 1 == 1).fold((0.0, 0.0), |(sa, sg), i| (sa + a[i], sg + g[i]));
        if ones == l && sa >= h - tol {
            consider(sg);
        }
        if ones + 1 != l {
            continue;
        }
        for i in 0..k {
            for j in i + 1..k {
                if mask >> i & 1 == 1 || mask >> j & 1 == 1 {
                    continue;
                }
                // x_i = θ, x_j = 1 - θ; the constraint is tight at a vertex.
                if (a[i] - a[j]).abs() < 1e-15 {
                    continue;
                }
                let theta = (h - sa - a[j]) / (a[i] - a[j]);
                if theta > 0.0 && theta < 1.0 {
                    consider(sg + theta * g[i] + (1.0 - theta) * g[j]);
                }
            }
        }
    }
    best
}

/// Random point of the selection polytope with sum `l`: positive weights
/// scaled by `c` and capped at 1, where `c` is found by bisection.
pub fn random_policy_values<R: Rng>(rng: &mut R, k: usize, l: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| 0.02 + rng.random::<f64>()).collect();
    let total = |c: f64| w.iter().map(|wi| (c * wi).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while total(hi) < l as f64 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < l as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    w.iter().map(|wi| (hi * wi).min(1.0)).collect()
}

pub fn radius(mu: f64, n: f64, gamma: f64) -> f64 {
    (gamma * mu / n).sqrt() + gamma / n
}

pub fn top_sum(values: &[f64], l: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|x, y| y.total_cmp(x));
    v[..l].iter().sum()
}

/// Indices of the `l` largest values, lowest index first on ties.
pub fn top_indices(values: &[f64], l: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx.truncate(l);
    idx.sort_unstable();
    idx
}

/// Reads a trace CSV into (header, rows).
pub fn read_trace(path: &std::path::Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| if f == "inf" { f64::INFINITY } else { f.parse().unwrap() })
                .collect()
        })
        .collect();
    (header, rows)
}
