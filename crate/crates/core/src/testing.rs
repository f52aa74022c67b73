//! Helpers shared by unit tests.

use crate::types::PolicyVector;

/// Maps positive weights onto the policy polytope by scaling with a common
/// factor and capping at 1 (the cap level is found by bisection).
pub fn scale_to_polytope(raw: &[f64], size: usize) -> PolicyVector {
    let w: Vec<f64> = raw.iter().map(|v| v.max(0.0) + 0.01).collect();
    let mass = |c: f64| w.iter().map(|v| (v * c).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while mass(hi) < size as f64 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < size as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let values: Vec<f64> = w.iter().map(|v| (v * hi).min(1.0)).collect();
    PolicyVector::with_size(values, size).expect("scaled vector lies in the polytope")
}
