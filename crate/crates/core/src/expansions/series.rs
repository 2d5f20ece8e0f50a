//! Truncated power series.

use super::poly::{indices_up_to, PolyND};
use super::target::TargetSpec;
use crate::error::{Error, Result};

/// Keep all series terms of total degree ≤ n. The target must have closed
/// form coefficients with Σ|a_j| ≤ 1, so the tail on [0, 1−δ]^d is at most
/// (1−δ)^n.
pub fn power_series_truncate(target: &TargetSpec, n: u32, d: usize) -> Result<PolyND> {
    if target.dimension != d {
        return Err(Error::InvalidParameter(format!("target has dimension {}, expected {d}", target.dimension)));
    }
    let total = target
        .series_abs_sum()
        .ok_or_else(|| Error::Precondition("target has no closed-form power series".into()))?;
    if total > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "coefficient sum Σ|a_j| = {total} exceeds 1; rescale the target by 1/{total}"
        )));
    }
    let mut terms = Vec::new();
    for j in indices_up_to(d, n) {
        let a = target.series_coeff(&j).expect("series coefficients available");
        terms.push((j, a));
    }
    PolyND::from_terms(d, terms)
}

/// Tail bound (1−δ)^n of a truncated series with Σ|a_j| ≤ 1 on [0, 1−δ]^d.
pub fn series_tail_bound(delta: f64, n: u32) -> f64 {
    (1.0 - delta).powi(n as i32)
}
