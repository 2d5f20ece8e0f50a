//! Chebyshev interpolation on [0,1]^d and conversion to monomials.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::poly::{indices_up_to, MultiIndex, PolyND};
use super::target::TargetSpec;
use crate::error::{invalid, Result};

/// Monomial conversion is flagged above this amplification estimate.
pub const CONDITIONING_LIMIT: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct ChebyshevFit {
    /// Monomial form on [0,1]^d.
    pub poly: PolyND,
    /// Coefficients b_k of Π T_{k_l}(2x_l − 1).
    pub cheb: BTreeMap<MultiIndex, f64>,
    /// Σ |b_k|·Π ‖T_{k_l}(2x−1)‖₁ relative to the largest sampled |f|.
    pub conditioning: f64,
    pub ill_conditioned: bool,
    pub max_coeff: f64,
}

/// Monomial coefficients of T_k(2x − 1) for k = 0..=m (exact integers up to
/// the precision of f64).
pub fn shifted_chebyshev_monomials(m: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
    if m >= 1 {
        rows.push(vec![-1.0, 2.0]);
    }
    for k in 1..m {
        let mut next = vec![0.0; k + 2];
        for (i, &c) in rows[k].iter().enumerate() {
            next[i + 1] += 4.0 * c;
            next[i] -= 2.0 * c;
        }
        for (i, &c) in rows[k - 1].iter().enumerate() {
            next[i] -= c;
        }
        rows.push(next);
    }
    rows
}

/// Chebyshev nodes of the first kind mapped to [0,1], with their angles.
fn nodes(m: usize) -> Vec<(f64, f64)> {
    (0..=m)
        .map(|i| {
            let th = (2 * i + 1) as f64 * PI / (2 * (m + 1)) as f64;
            (0.5 * (1.0 + th.cos()), th)
        })
        .collect()
}

/// Interpolate on the (m+1)^d tensor Chebyshev grid, keep Chebyshev terms
/// with |k|₁ ≤ n_total, and expand in monomials.
fn fit(target: &TargetSpec, m: usize, n_total: usize) -> Result<ChebyshevFit> {
    let d = target.dimension;
    let q = m + 1;
    let total = q.checked_pow(d as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| invalid("Chebyshev grid too large"))?;
    let nd = nodes(m);
    let mut f_scale = 0.0f64;
    let mut vals = vec![0.0; total];
    let mut x = vec![0.0; d];
    for (flat, v) in vals.iter_mut().enumerate() {
        let mut r = flat;
        for l in (0..d).rev() {
            x[l] = nd[r % q].0;
            r /= q;
        }
        *v = target.eval(&x);
        if !v.is_finite() {
            return Err(invalid(format!("target is not finite at {x:?}")));
        }
        f_scale = f_scale.max(v.abs());
    }
    // discrete cosine analysis along every axis
    let cos_tab: Vec<Vec<f64>> =
        (0..q).map(|k| nd.iter().map(|&(_, th)| (k as f64 * th).cos()).collect()).collect();
    let mut stride = 1;
    for _ in 0..d {
        let mut out = vec![0.0; total];
        for base in 0..total {
            if (base / stride) % q != 0 {
                continue;
            }
            for k in 0..q {
                let mut s = 0.0;
                for i in 0..q {
                    s += vals[base + i * stride] * cos_tab[k][i];
                }
                let scale = if k == 0 { 1.0 } else { 2.0 } / q as f64;
                out[base + k * stride] = s * scale;
            }
        }
        vals = out;
        stride *= q;
    }
    let rows = shifted_chebyshev_monomials(m);
    let row_norm: Vec<f64> = rows.iter().map(|r| r.iter().map(|c| c.abs()).sum()).collect();
    let mut cheb = BTreeMap::new();
    let mut mono: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    let mut amplification = 0.0;
    for k in indices_up_to(d, n_total as u32) {
        if k.iter().any(|&kl| kl as usize > m) {
            continue;
        }
        // axis 0 varies slowest in the flat layout
        let flat = k.iter().fold(0, |acc, &kl| acc * q + kl as usize);
        let b = vals[flat];
        cheb.insert(k.clone(), b);
        amplification += b.abs() * k.iter().map(|&kl| row_norm[kl as usize]).product::<f64>();
        // expand Π T_{k_l}(2x_l − 1)
        let mut terms: Vec<(MultiIndex, f64)> = vec![(vec![], b)];
        for &kl in &k {
            let row = &rows[kl as usize];
            let mut next = Vec::with_capacity(terms.len() * row.len());
            for (j, c) in &terms {
                for (e, &r) in row.iter().enumerate() {
                    if r != 0.0 {
                        let mut jj = j.clone();
                        jj.push(e as u32);
                        next.push((jj, c * r));
                    }
                }
            }
            terms = next;
        }
        for (j, c) in terms {
            *mono.entry(j).or_insert(0.0) += c;
        }
    }
    let poly = PolyND::from_terms(d, mono)?;
    let max_coeff = poly.terms().map(|(_, a)| a.abs()).fold(0.0, f64::max);
    let conditioning = if f_scale > 0.0 { amplification / f_scale } else { 1.0 };
    Ok(ChebyshevFit { poly, cheb, conditioning, ill_conditioned: conditioning > CONDITIONING_LIMIT, max_coeff })
}

/// Degree-m univariate interpolant at Chebyshev nodes on [0,1].
pub fn chebyshev_interpolant_1d(target: &TargetSpec, m: usize) -> Result<ChebyshevFit> {
    if target.dimension != 1 {
        return Err(invalid("univariate interpolation needs a one-dimensional target"));
    }
    fit(target, m, m)
}

/// Tensor interpolation of degree n per axis, truncated to total degree n.
pub fn chebyshev_tensor_coeffs(target: &TargetSpec, n: usize, d: usize) -> Result<ChebyshevFit> {
    if target.dimension != d {
        return Err(invalid("target dimension differs from d"));
    }
    fit(target, n, n)
}

/// Coefficient bound 2(m+1)3^m for the monomial form of a degree-m
/// interpolant of a function bounded by 1.
pub fn monomial_coeff_bound(m: usize) -> f64 {
    2.0 * (m + 1) as f64 * 3f64.powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::target::{CatalogFn, Domain};

    fn t1(c: CatalogFn) -> TargetSpec {
        TargetSpec::catalog(c, 1, Domain::UnitCube).unwrap()
    }

    #[test]
    fn shifted_rows_match_trig_definition() {
        let rows = shifted_chebyshev_monomials(10);
        for (k, row) in rows.iter().enumerate() {
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                let v: f64 = row.iter().enumerate().map(|(e, c)| c * x.powi(e as i32)).sum();
                let want = (k as f64 * (2.0 * x - 1.0).acos()).cos();
                assert!((v - want).abs() < 1e-9 * 6f64.powi(k as i32), "k={k}");
            }
        }
    }

    #[test]
    fn reproduces_square() {
        let f = chebyshev_interpolant_1d(&t1(CatalogFn::Square), 2).unwrap();
        assert!(f.poly.coeff(&[0]).abs() < 1e-12);
        assert!(f.poly.coeff(&[1]).abs() < 1e-12);
        assert!((f.poly.coeff(&[2]) - 1.0).abs() < 1e-12);
        assert!(!f.ill_conditioned);
    }

    #[test]
    fn reproduces_random_polynomials() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for m in 1..=8 {
            let a: Vec<f64> = (0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = PolyND::univariate(&a).unwrap();
            let t = TargetSpec::polynomial(p, Domain::UnitCube).unwrap();
            let f = chebyshev_interpolant_1d(&t, m).unwrap();
            for (k, ak) in a.iter().enumerate() {
                assert!((f.poly.coeff(&[k as u32]) - ak).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn interpolation_error_bound_for_reciprocal() {
        // |f^(9)| = 9!/(x+2)^10 ≤ 9!/2^10, so the bound is 2^-18
        let t = t1(CatalogFn::ReciprocalShift { a: 2.0 });
        let f = chebyshev_interpolant_1d(&t, 8).unwrap();
        let bound = 2f64.powi(-18);
        let worst = (0..=10_000)
            .map(|i| i as f64 / 10_000.0)
            .map(|x| (f.poly.eval(&[x]) - t.eval(&[x])).abs())
            .fold(0.0, f64::max);
        assert!(worst <= bound, "{worst} > {bound}");
    }

    #[test]
    fn coefficient_bound_for_cosine() {
        let f = chebyshev_interpolant_1d(&t1(CatalogFn::Cosine { freq: std::f64::consts::PI }), 6).unwrap();
        assert!(f.poly.terms().all(|(_, c)| c.abs() <= monomial_coeff_bound(6)));
    }

    #[test]
    fn tensor_reproduces_bilinear_monomial() {
        let p = PolyND::from_terms(2, vec![(vec![1, 1], 1.0)]).unwrap();
        let t = TargetSpec::polynomial(p, Domain::UnitCube).unwrap();
        let f = chebyshev_tensor_coeffs(&t, 2, 2).unwrap();
        assert!((f.poly.coeff(&[1, 1]) - 1.0).abs() < 1e-12);
        for (j, c) in f.poly.terms() {
            if j != &vec![1, 1] {
                assert!(c.abs() < 1e-12, "{j:?} {c}");
            }
        }
    }

    #[test]
    fn reciprocal_coefficients_decay_geometrically() {
        let t = t1(CatalogFn::ReciprocalShift { a: 2.0 });
        let f = chebyshev_tensor_coeffs(&t, 16, 1).unwrap();
        let b: Vec<f64> = (0..=12u32).map(|k| f.cheb[&vec![k]].abs()).collect();
        // Bernstein parameter of a pole at −2 on [0,1]: ρ = 5 + √24
        let rho = 5.0 + 24f64.sqrt();
        for k in 4..12 {
            let ratio = b[k + 1] / b[k];
            assert!((ratio - 1.0 / rho).abs() < 1e-3, "k={k} ratio={ratio}");
        }
    }

    #[test]
    fn high_degree_flags_conditioning() {
        let t = t1(CatalogFn::Runge { a: 25.0 });
        assert!(chebyshev_interpolant_1d(&t, 40).unwrap().ill_conditioned);
        assert!(!chebyshev_interpolant_1d(&t, 6).unwrap().ill_conditioned);
    }
}
