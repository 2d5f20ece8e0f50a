//! Normalized probabilists' Hermite polynomials Ξ_n and expansions in
//! L²(ℝ^d, γ_d).

use std::collections::BTreeMap;

use super::poly::MultiIndex;
use super::quadrature::{composite, compensated_sum, hermite_probabilists};
use super::target::TargetSpec;
use crate::error::{invalid, Result};
use crate::fit::{fit_line, LineFit};

/// Monomial coefficients c_{n,0..n} of Ξ_n = He_n/√(n!).
pub fn hermite_poly_coeffs(n: usize) -> Vec<f64> {
    // integer recurrence He_{k+1} = x He_k − k He_{k−1}
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    let norm = (1..=n).map(|k| k as f64).product::<f64>().sqrt();
    cur.iter().map(|c| c / norm).collect()
}

/// Ξ_n(x) by the normalized three-term recurrence.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    *hermite_eval_all(n, x).last().expect("nonempty")
}

/// Ξ_0(x), …, Ξ_n(x).
pub fn hermite_eval_all(n: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(1.0);
    if n >= 1 {
        v.push(x);
    }
    for k in 1..n {
        let next = (x * v[k] - (k as f64).sqrt() * v[k - 1]) / ((k + 1) as f64).sqrt();
        v.push(next);
    }
    v
}

/// Largest |⟨Ξ_i, Ξ_j⟩ − δ_ij| over i, j ≤ n_max using a q-point rule.
pub fn hermite_orthonormality_check(n_max: usize, q: usize) -> f64 {
    let rule = hermite_probabilists(q.max(n_max + 1));
    let vals: Vec<Vec<f64>> = rule.iter().map(|&(x, _)| hermite_eval_all(n_max, x)).collect();
    let mut worst = 0.0f64;
    for i in 0..=n_max {
        for j in 0..=n_max {
            let s = compensated_sum(rule.iter().zip(&vals).map(|(&(_, w), v)| w * v[i] * v[j]));
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - want).abs());
        }
    }
    worst
}

/// (1/√(2π))·(2n)!!·(√6 M)^{2n}·e^{−M²/2}, an upper bound on ∫_{|x|>M} Ξ_n² dγ₁.
pub fn hermite_tail_bound(n: usize, m: f64) -> f64 {
    let double_fact: f64 = (1..=n).map(|k| 2.0 * k as f64).product();
    double_fact * (6f64.sqrt() * m).powi(2 * n as i32) * (-m * m / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// ∫_{|x|>M} Ξ_n² dγ₁ by composite Gauss–Legendre quadrature.
pub fn hermite_tail_numeric(n: usize, m: f64) -> f64 {
    let hi = m + 40.0;
    let rule = composite(m, hi, &[], 8192, 16);
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    2.0 * compensated_sum(rule.iter().map(|&(x, w)| {
        let h = hermite_eval(n, x);
        w * h * h * c * (-x * x / 2.0).exp()
    }))
}

/// Default Gauss–Hermite order for coefficients up to degree n.
pub fn default_order(n: usize) -> usize {
    (2 * n + 16).max(40)
}

#[derive(Clone, Debug)]
pub struct HermiteExpansion {
    pub d: usize,
    pub n: usize,
    /// ⟨f, Ξ_ν⟩ for every 0 ≤ ν ≤ n componentwise.
    pub coeffs: BTreeMap<MultiIndex, f64>,
    pub quadrature_order: usize,
}

/// Tensor Gauss–Hermite estimates of ⟨f, Ξ_ν⟩, ν ∈ {0..n}^d.
pub fn hermite_expansion(target: &TargetSpec, n: usize, d: usize, q: usize) -> Result<HermiteExpansion> {
    if target.dimension != d {
        return Err(invalid("target dimension differs from d"));
    }
    if q < 2 * n {
        return Err(invalid(format!("quadrature order {q} is below 2n = {}", 2 * n)));
    }
    let total = q.checked_pow(d as u32).filter(|&t| t <= 20_000_000).ok_or_else(|| invalid("quadrature grid too large"))?;
    let rule = hermite_probabilists(q);
    // basis[k][i] = w_i Ξ_k(x_i)
    let mut basis = vec![vec![0.0; q]; n + 1];
    for (i, &(x, w)) in rule.iter().enumerate() {
        for (k, h) in hermite_eval_all(n, x).into_iter().enumerate() {
            basis[k][i] = w * h;
        }
    }
    let mut vals = vec![0.0; total];
    let mut x = vec![0.0; d];
    for (flat, v) in vals.iter_mut().enumerate() {
        let mut r = flat;
        for l in (0..d).rev() {
            x[l] = rule[r % q].0;
            r /= q;
        }
        *v = target.eval(&x);
        if !v.is_finite() {
            return Err(invalid(format!("target is not finite at {x:?}")));
        }
    }
    // contract the last axis first; the remaining axes keep their layout
    let mut shape = vec![q; d];
    for axis in (0..d).rev() {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut out = vec![0.0; outer * (n + 1) * inner];
        for o in 0..outer {
            for k in 0..=n {
                for t in 0..inner {
                    let s = compensated_sum(
                        (0..q).map(|i| basis[k][i] * vals[(o * q + i) * inner + t]),
                    );
                    out[(o * (n + 1) + k) * inner + t] = s;
                }
            }
        }
        shape[axis] = n + 1;
        vals = out;
    }
    let mut coeffs = BTreeMap::new();
    for (flat, &c) in vals.iter().enumerate() {
        let mut nu = vec![0u32; d];
        let mut r = flat;
        for l in (0..d).rev() {
            nu[l] = (r % (n + 1)) as u32;
            r /= n + 1;
        }
        coeffs.insert(nu, c);
    }
    Ok(HermiteExpansion { d, n, coeffs, quadrature_order: q })
}

impl HermiteExpansion {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let tables: Vec<Vec<f64>> = x.iter().map(|&xi| hermite_eval_all(self.n, xi)).collect();
        self.coeffs
            .iter()
            .map(|(nu, c)| c * nu.iter().enumerate().map(|(l, &k)| tables[l][k as usize]).product::<f64>())
            .sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.values().map(|c| c.abs()).sum()
    }

    /// Fit ln|c_ν| ≈ slope·Σ√(2ν_j+1) + intercept over coefficients above `floor`.
    pub fn decay_fit(&self, floor: f64) -> Option<LineFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .coeffs
            .iter()
            .filter(|(_, c)| c.abs() > floor)
            .map(|(nu, c)| (nu.iter().map(|&k| (2.0 * k as f64 + 1.0).sqrt()).sum::<f64>(), c.abs().ln()))
            .unzip();
        fit_line(&xs, &ys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::target::{CatalogFn, Domain};

    #[test]
    fn low_order_coefficients() {
        assert_eq!(hermite_poly_coeffs(0), vec![1.0]);
        assert_eq!(hermite_poly_coeffs(1), vec![0.0, 1.0]);
        let c2 = hermite_poly_coeffs(2);
        let s = 0.5f64.sqrt();
        assert!((c2[0] + s).abs() < 1e-15 && c2[1] == 0.0 && (c2[2] - s).abs() < 1e-15);
        assert!((hermite_eval(2, 0.0) + s).abs() < 1e-15);
    }

    #[test]
    fn coefficient_sums_within_bound() {
        for n in 0..=12 {
            let s: f64 = hermite_poly_coeffs(n).iter().map(|c| c.abs()).sum();
            assert!(s <= 6f64.powf(n as f64 / 2.0), "n={n} sum={s}");
        }
        let s6: f64 = hermite_poly_coeffs(6).iter().map(|c| c.abs()).sum();
        assert!(s6 <= 216.0);
    }

    #[test]
    fn recurrence_matches_monomial_form() {
        for n in 0..=12 {
            let c = hermite_poly_coeffs(n);
            for i in 0..=80 {
                let x = -4.0 + 0.1 * i as f64;
                let mono: f64 = c.iter().enumerate().map(|(j, a)| a * x.powi(j as i32)).sum();
                assert!((mono - hermite_eval(n, x)).abs() < 1e-8, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn orthonormal_under_gauss_hermite() {
        assert!(hermite_orthonormality_check(12, 40) < 1e-8);
        let rule = hermite_probabilists(32);
        let ip = |a: usize, b: usize| rule.iter().map(|&(x, w)| w * hermite_eval(a, x) * hermite_eval(b, x)).sum::<f64>();
        assert!((ip(3, 3) - 1.0).abs() < 1e-10);
        assert!(ip(2, 5).abs() < 1e-10);
    }

    #[test]
    fn tail_bound_dominates_numeric_tail() {
        // n = 0: exact Gaussian tail erfc(M/√2)
        let exact = libm::erfc(3.0 / 2f64.sqrt());
        assert!((hermite_tail_numeric(0, 3.0) - exact).abs() < 1e-12);
        assert!(exact <= hermite_tail_bound(0, 3.0));
        for n in 0..=6 {
            for m in [2.0, 4.0, 8.0] {
                assert!(hermite_tail_numeric(n, m) <= hermite_tail_bound(n, m), "n={n} M={m}");
                assert!(hermite_tail_bound(n + 1, m) >= hermite_tail_bound(n, m));
            }
        }
    }

    #[test]
    fn expansion_of_simple_targets() {
        let one = TargetSpec::catalog(CatalogFn::Constant { value: 1.0 }, 1, Domain::GaussianLine).unwrap();
        let e = hermite_expansion(&one, 6, 1, 40).unwrap();
        for (nu, c) in &e.coeffs {
            let want = if nu[0] == 0 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-10);
        }
        let id = TargetSpec::catalog(CatalogFn::Identity, 1, Domain::GaussianLine).unwrap();
        let e = hermite_expansion(&id, 6, 1, 40).unwrap();
        for (nu, c) in &e.coeffs {
            let want = if nu[0] == 1 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-10);
        }
        assert!(hermite_expansion(&id, 30, 1, 40).is_err());
    }

    #[test]
    fn cosine_coefficients_match_closed_form() {
        // ⟨cos, Ξ_2k⟩ = (−1)^k e^{−1/2}/√((2k)!), odd ones vanish; the squared
        // tail beyond 12 is the L² error of truncation
        let t = TargetSpec::catalog(CatalogFn::Cosine { freq: 1.0 }, 1, Domain::GaussianLine).unwrap();
        let e = hermite_expansion(&t, 24, 1, default_order(24)).unwrap();
        let mut tail = 0.0;
        for (nu, c) in &e.coeffs {
            let k = nu[0] as usize;
            let want = if k % 2 == 1 {
                0.0
            } else {
                let f: f64 = (1..=k).map(|i| i as f64).product();
                (-1f64).powi(k as i32 / 2) * (-0.5f64).exp() / f.sqrt()
            };
            assert!((c - want).abs() < 1e-12, "k={k}");
            if k > 12 {
                tail += c * c;
            }
        }
        assert!(tail <= 1e-8);
        assert!(e.decay_fit(1e-14).unwrap().slope < 0.0);
    }

    #[test]
    fn separable_two_dimensional_expansion() {
        let t = TargetSpec::catalog(CatalogFn::Cosine { freq: 1.0 }, 2, Domain::GaussianLine).unwrap();
        let e = hermite_expansion(&t, 4, 2, 40).unwrap();
        let one = (-0.5f64).exp();
        assert!((e.coeffs[&vec![0, 0]] - one * one).abs() < 1e-12);
        assert!((e.coeffs[&vec![2, 0]] + one * one / 2f64.sqrt()).abs() < 1e-12);
        assert!(e.coeffs[&vec![1, 2]].abs() < 1e-12);
        let x = [0.3, -0.4];
        assert!((e.eval(&x) - t.eval(&x)).abs() < 0.05);
    }
}
