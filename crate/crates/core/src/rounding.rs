//! Dependent rounding of a fractional selection vector into exactly `L` arms.
//!
//! Each step takes two fractional coordinates and moves probability mass
//! between them so that one of the pair reaches 0 or 1 while the expected
//! value of both is unchanged. After at most `K` steps every coordinate is
//! integral, the sum is still `L`, and arm `i` ends up selected with
//! probability exactly `x_i`.

use rand::Rng;

use crate::types::{PolicyVector, SelectionSet};

/// Coordinates this close to 0 or 1 are treated as integral.
pub const SNAP_EPS: f64 = 1e-12;

fn snap(v: f64) -> f64 {
    if v <= SNAP_EPS {
        0.0
    } else if v >= 1.0 - SNAP_EPS {
        1.0
    } else {
        v
    }
}

fn is_fractional(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// Draws a selection set whose per-arm inclusion probabilities equal `x`.
///
/// Pairs are always the two lowest-indexed fractional coordinates, so the
/// result is a deterministic function of `x` and the random stream.
pub fn dependent_rounding<R: Rng + ?Sized>(x: &PolicyVector, rng: &mut R) -> SelectionSet {
    let mut v: Vec<f64> = x.values().iter().map(|&c| snap(c)).collect();
    let k = v.len();

    let mut i = match (0..k).find(|&c| is_fractional(v[c])) {
        Some(i) => i,
        None => return collect(&v, x.size()),
    };
    let mut j = i + 1;
    loop {
        while j < k && !is_fractional(v[j]) {
            j += 1;
        }
        if j >= k {
            // Only float residue can leave a single fractional coordinate.
            v[i] = v[i].round();
            break;
        }

        let (xi, xj) = (v[i], v[j]);
        let p = (1.0 - xi).min(xj);
        let q = xi.min(1.0 - xj);
        if p + q > 0.0 {
            if rng.random::<f64>() * (p + q) < q {
                // (x_i + p, x_j - p)
                if 1.0 - xi <= xj {
                    v[i] = 1.0;
                    v[j] = snap(xj - p);
                } else {
                    v[i] = snap(xi + p);
                    v[j] = 0.0;
                }
            } else {
                // (x_i - q, x_j + q)
                if xi <= 1.0 - xj {
                    v[i] = 0.0;
                    v[j] = snap(xj + q);
                } else {
                    v[i] = snap(xi - q);
                    v[j] = 1.0;
                }
            }
        }

        if is_fractional(v[i]) {
            j += 1;
        } else if is_fractional(v[j]) {
            i = j;
            j += 1;
        } else {
            match (j + 1..k).find(|&c| is_fractional(v[c])) {
                Some(next) => {
                    i = next;
                    j = next + 1;
                }
                None => break,
            }
        }
    }
    collect(&v, x.size())
}

fn collect(v: &[f64], size: usize) -> SelectionSet {
    let indices: Vec<usize> = v
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 1.0)
        .map(|(i, _)| i)
        .collect();
    debug_assert_eq!(indices.len(), size, "rounding lost mass: {v:?}");
    SelectionSet::from_sorted(indices)
}
