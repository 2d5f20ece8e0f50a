//! Polynomial, smooth and analytic targets on cubes.

use std::collections::{BTreeMap, BTreeSet};

use super::{min_height, size, BuildInputs, BuildReport};
use crate::blocks::times_in;
use crate::error::{invalid, Error, Result};
use crate::expansions::chebyshev::{chebyshev_interpolant_1d, chebyshev_tensor_coeffs, monomial_coeff_bound};
use crate::expansions::poly::{binomial, total_degree, MultiIndex, PolyND};
use crate::expansions::series::{power_series_truncate, series_tail_bound};
use crate::expansions::target::TargetSpec;
use crate::net3d::assemble::{Assembler, Expr};

/// Running state of Σ a_k h_k(x) with h_{k+1} = ×̂(x, h_k), one layer per
/// step. Each layer holds the product gadget plus carriers for x and the
/// partial sum, so several chains can share layers.
pub(crate) struct PolyChain {
    x: Expr,
    last: Expr,
    acc: Expr,
    acc_bound: f64,
    coeffs: Vec<f64>,
    k: usize,
}

impl PolyChain {
    /// `x` must take values in [0,1].
    pub fn new(x: Expr, coeffs: &[f64]) -> PolyChain {
        let a1 = coeffs.get(1).copied().unwrap_or(0.0);
        PolyChain {
            acc: x.clone() * a1,
            last: x.clone(),
            x,
            acc_bound: a1.abs(),
            coeffs: coeffs.to_vec(),
            k: 1,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn steps_left(&self) -> usize {
        self.degree().saturating_sub(self.k)
    }

    /// Add h_{k+1} in the open layer.
    pub fn step(&mut self, a: &mut Assembler, h: usize) {
        let next = times_in(a, &self.x, &self.last, h, 0);
        self.x = a.carry(0, &self.x, 0.0);
        let acc = a.carry(0, &self.acc, -self.acc_bound - 1.0);
        self.k += 1;
        let ak = self.coeffs[self.k];
        self.acc = acc + next.clone() * ak;
        self.acc_bound += ak.abs();
        self.last = next;
    }

    pub fn output(&self) -> Expr {
        self.acc.clone().shift(self.coeffs.first().copied().unwrap_or(0.0))
    }
}

/// Σ a_k x^k on [0,1] in N_{8, n−1, H}.
pub fn build_poly1d(coeffs: &[f64], h: usize) -> Result<BuildReport> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Err(invalid("polynomial degree must be at least 1"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(invalid("polynomial coefficients must be finite"));
    }
    let mut a = Assembler::new(1);
    let mut chain = PolyChain::new(a.input(0), coeffs);
    while chain.steps_left() > 0 {
        a.begin_layer();
        chain.step(&mut a, h);
    }
    let net = a.finish(&[chain.output()])?;
    let max_a = coeffs[1..].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let bound = max_a * 3.0 * (n * n) as f64 * 4f64.powi(-(h as i32 + 1));
    let (w, hh) = if n >= 2 { (8, h.max(1)) } else { (0, 0) };
    let expected = size(w, n - 1, hh);
    let inputs = BuildInputs { n: Some(n), h: Some(h), d: Some(1), ..Default::default() };
    Ok(BuildReport::new(net, expected, bound, "poly: max|a_k|·3n²·2^(−2(H+1))", inputs)
        .stated(size(w, n - 1, hh)))
}

/// Stated width ⌈d + 1 + 6(e(n+d)/d)^d⌉ of the multivariate polynomial net.
pub fn poly_nd_stated_width(n: usize, d: usize) -> usize {
    let df = d as f64;
    (df + 1.0 + 6.0 * (std::f64::consts::E * (n as f64 + df) / df).powf(df)).ceil() as usize
}

/// Monomials to build: every term of degree ≥ 2 plus its chain of parents,
/// where the parent of j is j − e_i for the first nonzero index i.
fn needed_monomials(poly: &PolyND) -> BTreeMap<u32, BTreeSet<MultiIndex>> {
    let mut by_degree: BTreeMap<u32, BTreeSet<MultiIndex>> = BTreeMap::new();
    for (j, _) in poly.terms() {
        let mut cur = j.clone();
        while total_degree(&cur) >= 2 {
            let k = total_degree(&cur);
            if !by_degree.entry(k).or_default().insert(cur.clone()) {
                break;
            }
            let i = cur.iter().position(|&e| e > 0).unwrap();
            cur[i] -= 1;
        }
    }
    by_degree
}

fn first_nonzero(j: &[u32]) -> usize {
    j.iter().position(|&e| e > 0).unwrap()
}

/// Multivariate polynomial on [0,1]^d. Layer k emits the needed monomials
/// of degree k+1 and carries the inputs and the partial sum.
pub fn build_poly_nd(poly: &PolyND, h: usize, width_cap: usize) -> Result<BuildReport> {
    let d = poly.dim();
    let n = poly.degree() as usize;
    let needed = needed_monomials(poly);
    let estimate = needed.values().map(|s| d + 1 + 6 * s.len()).max().unwrap_or(0);
    if estimate > width_cap {
        return Err(Error::WidthCap { estimate, cap: width_cap });
    }
    let mut a = Assembler::new(d);
    let mut xs = a.inputs();
    let mut acc = Expr::sum(
        poly.terms().filter(|(j, _)| total_degree(j) == 1).map(|(j, c)| (c, &xs[first_nonzero(j)])),
        0.0,
    );
    let mut acc_bound = poly.terms().filter(|(j, _)| total_degree(j) == 1).map(|(_, c)| c.abs()).sum::<f64>();
    let mut level: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
    for (i, x) in xs.iter().enumerate() {
        let mut e = vec![0u32; d];
        e[i] = 1;
        level.insert(e, x.clone());
    }
    for k in 2..=n as u32 {
        a.begin_layer();
        let mut next = BTreeMap::new();
        for j in needed.get(&k).into_iter().flatten() {
            let i = first_nonzero(j);
            let mut parent = j.clone();
            parent[i] -= 1;
            let hj = times_in(&mut a, &xs[i], &level[&parent], h, 0);
            next.insert(j.clone(), hj);
        }
        xs = xs.iter().map(|x| a.carry(0, x, 0.0)).collect();
        let carried = a.carry(0, &acc, -acc_bound - 1.0);
        let mut parts = vec![(1.0, &carried)];
        for (j, hj) in &next {
            let c = poly.coeff(j);
            if c != 0.0 {
                parts.push((c, hj));
                acc_bound += c.abs();
            }
        }
        acc = Expr::sum(parts, 0.0);
        level = next;
    }
    let out = acc.shift(poly.coeff(&vec![0; d]));
    let net = a.finish(&[out])?;
    let max_a = poly.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
    let nf = n.max(1) as f64;
    let stirling = (std::f64::consts::E * (nf + d as f64) / d as f64).powi(d as i32);
    let bound = max_a * 6.0 * nf * 4f64.powi(-(h as i32 + 1)) * stirling;
    let depth = n.saturating_sub(1);
    let height = if n >= 2 { h.max(1) } else { 0 };
    let expected = size(if n >= 2 { estimate } else { 0 }, depth, height);
    let inputs = BuildInputs { n: Some(n), h: Some(h), d: Some(d), ..Default::default() };
    let per_layer_max = needed.values().map(|s| s.len()).max().unwrap_or(0);
    Ok(BuildReport::new(net, expected, bound, "polyNd: max|a_j|·6n·2^(−2(H+1))·(e(n+d)/d)^d", inputs)
        .diag("monomials_per_layer_max", per_layer_max as f64)
        .diag("monomials_per_layer_limit", binomial((n + d) as u64, d as u64))
        .stated(size(poly_nd_stated_width(n, d), depth, height)))
}

/// C^∞ target on [0,1] with |f^(k)| ≤ k!: Chebyshev interpolant of degree
/// N+1, then the polynomial net; sup error ≤ 2^{−N}.
pub fn build_smooth1d(target: &TargetSpec, n: usize) -> Result<BuildReport> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let m = n + 1;
    let fit = chebyshev_interpolant_1d(target, m)?;
    let coeffs: Vec<f64> = (0..=m as u32).map(|k| fit.poly.coeff(&[k])).collect();
    let half = 2f64.powi(-(n as i32) - 1);
    let guaranteed = target.derivative_bound_holds();
    // network part: max|c_k|·3m²·2^{−2(H+1)} ≤ 2^{−N−1}
    let coeff_max = if guaranteed {
        monomial_coeff_bound(m)
    } else {
        coeffs[1..].iter().map(|c| c.abs()).fold(0.0, f64::max)
    };
    let h = min_height(coeff_max * 3.0 * (m * m) as f64, half);
    let mf = m as f64;
    let stated_h = (0.5 * (6f64.log2() * mf + 3.0 * (mf + 1.0).log2() + 3f64.log2() - 1.0)).ceil() as usize;
    let mut report = build_poly1d(&coeffs, h)?;
    report.theoretical_bound = 2f64.powi(-(n as i32));
    report.bound_formula_id = "smooth: 2^(−N)".into();
    report.inputs.n = Some(n);
    report.stated_metrics = None;
    let mut report = report
        .stated(size(8, n, stated_h))
        .diag("interpolation_degree", mf)
        .diag("chosen_height", h as f64)
        .diag("stated_height", stated_h as f64)
        .diag("conditioning", fit.conditioning);
    if !guaranteed {
        report = report.note("target lacks the |f^(k)| ≤ k! guarantee; bound is empirical");
    }
    if fit.ill_conditioned {
        report = report.note("monomial conversion is ill-conditioned");
    }
    Ok(report)
}

/// Analytic target with Σ|a_j| ≤ 1 on [0, 1−δ]^d: truncated series plus the
/// multivariate polynomial net, error ≤ 2(1−δ)^N.
pub fn build_analytic_cube(target: &TargetSpec, n: usize, delta: f64, d: usize) -> Result<BuildReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let poly = power_series_truncate(target, n as u32, d)?;
    let nf = n as f64;
    let df = d as f64;
    let tail = series_tail_bound(delta, n as u32);
    let stirling = (std::f64::consts::E * (nf + df) / df).powf(df);
    let h = min_height(6.0 * nf * stirling, tail);
    let stated_h = 0.5
        * (nf.log2() + nf * (1.0 - delta).log2() + df * (nf + df).log2() - df * (df / std::f64::consts::E).log2()
            - 6f64.log2()
            - 2.0);
    let mut report = build_poly_nd(&poly, h, super::DEFAULT_WIDTH_CAP)?;
    report.theoretical_bound = 2.0 * tail;
    report.bound_formula_id = "analytic-cube: 2(1−δ)^N".into();
    report.inputs = BuildInputs { n: Some(n), h: Some(h), delta: Some(delta), d: Some(d), ..Default::default() };
    report.stated_metrics = None;
    let stated_hc = stated_h.ceil().max(0.0) as usize;
    Ok(report
        .stated(size(poly_nd_stated_width(n, d), n - 1, stated_hc))
        .diag("chosen_height", h as f64)
        .diag("stated_height_raw", stated_h)
        .note(format!("height solved from the polynomial bound: {h}; closed-form statement gives {stated_h:.3}")))
}

/// Target analytic in a Bernstein ellipse with parameter ρ: truncated
/// Chebyshev fit and the multivariate polynomial net, error C·ρ^{−N/√d}.
pub fn build_analytic_ellipse(target: &TargetSpec, n: usize, rho: f64, d: usize) -> Result<BuildReport> {
    if !(rho > 2f64.powf((d as f64).sqrt())) {
        return Err(invalid("rho must exceed 2^√d"));
    }
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let fit = chebyshev_tensor_coeffs(target, n, d)?;
    let nf = n as f64;
    let df = d as f64;
    let hf = 0.5
        * (df * ((nf + 1.0) * std::f64::consts::E * (nf + df) / df).log2() + (6.0 * nf).log2()
            + nf / df.sqrt() * rho.log2()
            - 2.0);
    let h = hf.ceil().max(0.0) as usize;
    let mut report = build_poly_nd(&fit.poly, h, super::DEFAULT_WIDTH_CAP)?;
    report.theoretical_bound = rho.powf(-nf / df.sqrt());
    report.bound_formula_id = "ellipse: C·ρ^(−N/√d), C fitted".into();
    report.inputs = BuildInputs { n: Some(n), h: Some(h), rho: Some(rho), d: Some(d), ..Default::default() };
    report.stated_metrics = None;
    let depth = report.metrics.depth;
    let mut report = report
        .stated(size(poly_nd_stated_width(n, d), n - 1, h))
        .diag("max_coeff", fit.max_coeff)
        .diag("max_coeff_over_growth", fit.max_coeff / (nf + 1.0).powf(df))
        .diag("conditioning", fit.conditioning);
    if depth + 1 < n {
        report = report.note(format!("fitted polynomial has degree {} below N", depth + 1));
    }
    if fit.ill_conditioned {
        report = report.note("monomial conversion is ill-conditioned");
    }
    Ok(report)
}
