//! Estimator for the r-th order modulus of smoothness of a periodically
//! extended target.

use super::poly::binomial;
use super::quadrature::{composite, CompensatedSum};
use super::target::TargetSpec;
use crate::error::{invalid, Result};

/// Number of step sizes sampled geometrically in (0, t].
pub const STEP_SAMPLES: usize = 32;

/// ω_r(f, t)_p: sup over coordinate directions and sampled h ∈ (0, t] of
/// ‖Δ^r_{h e_i} f‖_p over one period cell. `p = f64::INFINITY` gives the sup
/// norm on a uniform grid. `nodes` is the per-dimension resolution.
pub fn modulus_smoothness(target: &TargetSpec, r: usize, t: f64, p: f64, nodes: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("modulus step t must be positive"));
    }
    if !(p >= 1.0) {
        return Err(invalid("modulus exponent p must be at least 1"));
    }
    let (lo, hi) = target.domain.bounds().ok_or_else(|| invalid("modulus needs a bounded period cell"))?;
    let d = target.dimension;
    let period = hi - lo;
    let wrap = |v: f64| lo + (v - lo).rem_euclid(period);
    let rule: Vec<(f64, f64)> = if p.is_infinite() {
        (0..=nodes).map(|i| (lo + period * i as f64 / nodes as f64, 1.0)).collect()
    } else {
        composite(lo, hi, &target.breakpoints(), nodes, 16)
    };
    let q = rule.len();
    let total = q.pow(d as u32);
    let coef: Vec<f64> =
        (0..=r).map(|k| if (r - k) % 2 == 0 { 1.0 } else { -1.0 } * binomial(r as u64, k as u64)).collect();
    let mut best = 0.0f64;
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    for s in 0..STEP_SAMPLES {
        let h = t * 2f64.powf(-10.0 * s as f64 / (STEP_SAMPLES - 1) as f64);
        for dir in 0..d {
            let mut acc = CompensatedSum::default();
            let mut sup = 0.0f64;
            for flat in 0..total {
                let mut rest = flat;
                let mut w = 1.0;
                for l in (0..d).rev() {
                    let (xl, wl) = rule[rest % q];
                    x[l] = xl;
                    w *= wl;
                    rest /= q;
                }
                let mut diff = 0.0;
                for (k, c) in coef.iter().enumerate() {
                    y.copy_from_slice(&x);
                    y[dir] = wrap(x[dir] + k as f64 * h);
                    diff += c * target.eval(&y);
                }
                if p.is_infinite() {
                    sup = sup.max(diff.abs());
                } else {
                    acc.add(w * diff.abs().powf(p));
                }
            }
            let norm = if p.is_infinite() { sup } else { acc.value().powf(1.0 / p) };
            best = best.max(norm);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::target::{CatalogFn, Domain};

    #[test]
    fn constants_have_zero_modulus() {
        let t = TargetSpec::catalog(CatalogFn::Constant { value: 3.0 }, 1, Domain::SymmetricCube { half_width: 1.0 })
            .unwrap();
        assert_eq!(modulus_smoothness(&t, 2, 0.1, 2.0, 256).unwrap(), 0.0);
    }

    #[test]
    fn first_difference_of_cosine() {
        // sup_x |cos(π(x+h)) − cos(πx)| = 2 sin(πh/2), largest at h = t
        let t = TargetSpec::catalog(
            CatalogFn::Cosine { freq: std::f64::consts::PI },
            1,
            Domain::SymmetricCube { half_width: 1.0 },
        )
        .unwrap();
        let est = modulus_smoothness(&t, 1, 0.01, f64::INFINITY, 4096).unwrap();
        let exact = 2.0 * (std::f64::consts::PI * 0.005).sin();
        assert!((est - exact).abs() <= 0.02 * exact, "{est} vs {exact}");
    }

    #[test]
    fn nondecreasing_in_t() {
        let t = TargetSpec::catalog(CatalogFn::AbsPower { alpha: 0.5 }, 1, Domain::SymmetricCube { half_width: 1.0 })
            .unwrap();
        let mut last = 0.0;
        for k in 1..6 {
            let w = modulus_smoothness(&t, 2, 0.02 * k as f64, 2.0, 512).unwrap();
            assert!(w >= last);
            last = w;
        }
    }

    #[test]
    fn parity_part_does_not_exceed_whole() {
        let t = TargetSpec::catalog(CatalogFn::Step, 1, Domain::SymmetricCube { half_width: 1.0 }).unwrap();
        let whole = modulus_smoothness(&t, 1, 0.1, 2.0, 1024).unwrap();
        for part in crate::expansions::trig::parity_decompose(&t).unwrap() {
            assert!(modulus_smoothness(&part, 1, 0.1, 2.0, 1024).unwrap() <= whole * (1.0 + 1e-3));
        }
    }
}
