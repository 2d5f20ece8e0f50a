//! The Jackson-type operator T_n and its tensor form on symmetric cubes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::jackson::{jackson_kernel, KernelCoeffs};
use super::poly::{binomial, MultiIndex};
use super::quadrature::{composite, compensated_sum};
use super::target::{TargetFn, TargetSpec};
use crate::error::{invalid, Result};

/// Coefficients of one parity component of T_n^d f:
/// Σ_j a_j Π cos(j_k π x_k / T − η_k π/2).
#[derive(Clone, Debug, Serialize)]
pub struct TrigOperatorCoeffs {
    pub d: usize,
    pub n: usize,
    pub r: usize,
    /// Half-width T of the cube [−T, T]^d.
    pub half_width: f64,
    pub alpha: Vec<f64>,
    /// η_k = 0 for even (cosine) and 1 for odd (sine) dependence on x_k.
    pub parity: Vec<u8>,
    pub a: BTreeMap<MultiIndex, f64>,
    /// ‖f‖₁ over the cube, measured with the same quadrature.
    pub l1_norm: f64,
}

/// The full operator as a sum of parity components.
#[derive(Clone, Debug, Serialize)]
pub struct TrigOperator {
    pub components: Vec<TrigOperatorCoeffs>,
}

/// α_j = Σ_{1≤k≤r, jk≤n} (−1)^{k+1} C(r,k) a_{jk} for j = 0..=n.
pub fn trig_alpha(kernel: &KernelCoeffs) -> Vec<f64> {
    let (n, r) = (kernel.n, kernel.r);
    (0..=n)
        .map(|j| {
            let mut s = 0.0;
            for k in 1..=r {
                if j * k > n {
                    break;
                }
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                s += sign * binomial(r as u64, k as u64) * kernel.a[j * k];
            }
            s
        })
        .collect()
}

/// Default quadrature nodes per dimension.
pub fn default_nodes(d: usize) -> usize {
    match d {
        1 => 4096,
        2 => 512,
        _ => 128,
    }
}

fn symmetric_half_width(target: &TargetSpec) -> Result<f64> {
    match target.domain.bounds() {
        Some((lo, hi)) if lo == -hi && hi > 0.0 => Ok(hi),
        _ => Err(invalid("trigonometric approximation needs a symmetric cube domain")),
    }
}

/// Split f into the 2^d components that are even or odd in each coordinate.
/// Component `mask` is odd in x_k exactly when bit k of `mask` is set.
pub fn parity_decompose(target: &TargetSpec) -> Result<Vec<TargetSpec>> {
    let d = target.dimension;
    (0..1usize << d)
        .map(|mask| {
            let eta = (0..d).map(|k| (mask >> k & 1) as u8).collect();
            TargetSpec::new(TargetFn::Parity { base: Box::new(target.clone()), eta }, d, target.domain)
        })
        .collect()
}

/// Tensor T_n coefficients of the parity-η part of f with `nodes` quadrature
/// points per dimension.
pub fn trig_operator_nd(target: &TargetSpec, n: usize, r: usize, parity: &[u8], nodes: usize) -> Result<TrigOperatorCoeffs> {
    let d = target.dimension;
    if parity.len() != d || parity.iter().any(|&e| e > 1) {
        return Err(invalid("parity vector must hold d entries in {0, 1}"));
    }
    let half = symmetric_half_width(target)?;
    let kernel = jackson_kernel(n, r)?;
    let alpha = trig_alpha(&kernel);
    let rule = composite(-half, half, &target.breakpoints(), nodes, 16);
    let q = rule.len();
    let total = q.checked_pow(d as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| invalid("quadrature grid too large"))?;
    let mut vals = vec![0.0; total];
    let mut x = vec![0.0; d];
    for (flat, v) in vals.iter_mut().enumerate() {
        let mut rest = flat;
        for l in (0..d).rev() {
            x[l] = rule[rest % q].0;
            rest /= q;
        }
        *v = target.eval(&x);
    }
    let mut l1 = CompensatedGrid::new(&rule, d);
    let l1_norm = l1.integrate(&vals, |v| v.abs());
    // contract axes from the last; basis includes the weight and the π/T factor
    let scale = PI / half;
    let mut shape = vec![q; d];
    for axis in (0..d).rev() {
        let odd = parity[axis] == 1;
        let basis: Vec<Vec<f64>> = (0..=n)
            .map(|j| {
                rule.iter()
                    .map(|&(t, w)| {
                        let arg = j as f64 * scale * t;
                        w * scale * if odd { arg.sin() } else { arg.cos() }
                    })
                    .collect()
            })
            .collect();
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut out = vec![0.0; outer * (n + 1) * inner];
        for o in 0..outer {
            for (j, b) in basis.iter().enumerate() {
                for t in 0..inner {
                    out[(o * (n + 1) + j) * inner + t] =
                        compensated_sum((0..q).map(|i| b[i] * vals[(o * q + i) * inner + t]));
                }
            }
        }
        shape[axis] = n + 1;
        vals = out;
    }
    let mut a = BTreeMap::new();
    for (flat, &integral) in vals.iter().enumerate() {
        let mut j = vec![0u32; d];
        let mut rest = flat;
        for l in (0..d).rev() {
            j[l] = (rest % (n + 1)) as u32;
            rest /= n + 1;
        }
        if j.iter().zip(parity).any(|(&jk, &e)| jk == 0 && e == 1) {
            continue;
        }
        let weight: f64 = j.iter().map(|&jk| alpha[jk as usize]).product();
        a.insert(j, weight * integral);
    }
    Ok(TrigOperatorCoeffs { d, n, r, half_width: half, alpha, parity: parity.to_vec(), a, l1_norm })
}

/// Tensor product of quadrature weights over a grid.
struct CompensatedGrid {
    weights: Vec<f64>,
}

impl CompensatedGrid {
    fn new(rule: &[(f64, f64)], d: usize) -> Self {
        let mut weights = vec![1.0];
        for _ in 0..d {
            weights = weights.iter().flat_map(|&w0| rule.iter().map(move |&(_, w)| w0 * w)).collect();
        }
        CompensatedGrid { weights }
    }

    fn integrate(&mut self, vals: &[f64], g: impl Fn(f64) -> f64) -> f64 {
        compensated_sum(self.weights.iter().zip(vals).map(|(w, &v)| w * g(v)))
    }
}

/// T_n f for a univariate target: the even (cosine) and odd (sine) parts.
pub fn trig_operator_1d(target: &TargetSpec, n: usize, r: usize) -> Result<TrigOperator> {
    if target.dimension != 1 {
        return Err(invalid("univariate operator needs a one-dimensional target"));
    }
    trig_operator(target, n, r, default_nodes(1))
}

/// T_n^d f through parity decomposition.
pub fn trig_operator(target: &TargetSpec, n: usize, r: usize, nodes: usize) -> Result<TrigOperator> {
    let components = parity_decompose(target)?
        .iter()
        .map(|g| match &g.function {
            TargetFn::Parity { eta, .. } => trig_operator_nd(g, n, r, eta, nodes),
            _ => unreachable!(),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrigOperator { components })
}

pub fn apply_tn(coeffs: &TrigOperatorCoeffs, x: &[f64]) -> f64 {
    let scale = PI / coeffs.half_width;
    let tables: Vec<Vec<f64>> = x
        .iter()
        .zip(&coeffs.parity)
        .map(|(&xk, &e)| {
            (0..=coeffs.n)
                .map(|j| {
                    let arg = j as f64 * scale * xk;
                    if e == 1 {
                        arg.sin()
                    } else {
                        arg.cos()
                    }
                })
                .collect()
        })
        .collect();
    coeffs.a.iter().map(|(j, a)| a * j.iter().enumerate().map(|(k, &jk)| tables[k][jk as usize]).product::<f64>()).sum()
}

impl TrigOperatorCoeffs {
    pub fn max_alpha(&self) -> f64 {
        self.alpha.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.a.values().map(|a| a.abs()).fold(0.0, f64::max)
    }
}

impl TrigOperator {
    pub fn apply(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|c| apply_tn(c, x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::target::{CatalogFn, Domain};

    fn on_pi(c: CatalogFn, d: usize) -> TargetSpec {
        TargetSpec::catalog(c, d, Domain::SymmetricCube { half_width: PI }).unwrap()
    }

    #[test]
    fn reproduces_constants() {
        let t = on_pi(CatalogFn::Constant { value: 1.0 }, 1);
        for r in 1..=3 {
            let op = trig_operator_1d(&t, 12, r).unwrap();
            for x in [-3.0, -1.0, 0.0, 0.5, 2.9] {
                assert!((op.apply(&[x]) - 1.0).abs() < 1e-12, "r={r}");
            }
        }
    }

    #[test]
    fn alpha_uses_divisor_sum() {
        let k = jackson_kernel(8, 2).unwrap();
        let alpha = trig_alpha(&k);
        assert_eq!(alpha[0], k.a[0]);
        assert!((alpha[3] - (2.0 * k.a[3] - k.a[6])).abs() < 1e-16);
        assert_eq!(alpha[5], 2.0 * k.a[5]);
    }

    #[test]
    fn low_frequency_cosine_is_damped_but_close() {
        // T_n cos = λ cos with λ = α_1·π
        let t = on_pi(CatalogFn::Cosine { freq: 1.0 }, 1);
        let op = trig_operator_1d(&t, 32, 2).unwrap();
        let even = &op.components[0];
        let lambda = even.alpha[1] * PI;
        for x in [-2.0, 0.0, 1.0] {
            assert!((op.apply(&[x]) - lambda * x.cos()).abs() < 1e-12);
        }
        assert!((lambda - 1.0).abs() < 0.02, "{lambda}");
    }

    #[test]
    fn linearity() {
        let f = on_pi(CatalogFn::AbsSum, 1);
        let g = on_pi(CatalogFn::Sign, 1);
        let opf = trig_operator_1d(&f, 10, 2).unwrap();
        let opg = trig_operator_1d(&g, 10, 2).unwrap();
        for x in [-2.5, -0.3, 0.7, 3.0] {
            let lhs = 2.0 * opf.apply(&[x]) - 3.0 * opg.apply(&[x]);
            let direct: f64 = opf
                .components
                .iter()
                .zip(&opg.components)
                .map(|(a, b)| {
                    let mut c = a.clone();
                    for (j, v) in c.a.iter_mut() {
                        *v = 2.0 * *v - 3.0 * b.a[j];
                    }
                    apply_tn(&c, &[x])
                })
                .sum();
            assert!((lhs - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn parity_components_sum_to_target() {
        let t = TargetSpec::catalog(CatalogFn::AbsPower { alpha: 0.5 }, 2, Domain::SymmetricCube { half_width: 1.0 })
            .unwrap();
        let parts = parity_decompose(&t).unwrap();
        assert_eq!(parts.len(), 4);
        for i in 0..=10 {
            for j in 0..=10 {
                let x = [-1.0 + 0.2 * i as f64, -1.0 + 0.2 * j as f64 + 0.03];
                let s: f64 = parts.iter().map(|p| p.eval(&x)).sum();
                assert!((s - t.eval(&x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coordinate_function_is_single_component() {
        let p = super::super::poly::PolyND::from_terms(2, vec![(vec![1, 0], 1.0)]).unwrap();
        let t = TargetSpec::polynomial(p, Domain::SymmetricCube { half_width: 1.0 }).unwrap();
        let parts = parity_decompose(&t).unwrap();
        for (mask, g) in parts.iter().enumerate() {
            for x in [[0.3, 0.4], [-0.7, 0.1]] {
                let want = if mask == 1 { x[0] } else { 0.0 };
                assert!((g.eval(&x) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sign_has_only_sine_terms() {
        let t = on_pi(CatalogFn::Sign, 1);
        let op = trig_operator_1d(&t, 16, 2).unwrap();
        assert!(op.components[0].max_coeff() < 1e-12);
        assert!(op.components[1].max_coeff() > 0.1);
    }
}
