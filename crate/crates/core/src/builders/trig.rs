//! Trigonometric nets cos(kπx), sin(kπx) and L^p approximation on [−1,1]^d.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::poly::PolyChain;
use super::{min_height, size, BuildInputs, BuildReport};
use crate::blocks::{ceil_log2, fold_in, times_sym_in};
use crate::error::{invalid, Error, Result};
use crate::expansions::chebyshev::{chebyshev_interpolant_1d, shifted_chebyshev_monomials};
use crate::expansions::modulus::modulus_smoothness;
use crate::expansions::quadrature::{compensated_sum, composite};
use crate::expansions::target::{CatalogFn, Domain, TargetFn, TargetSpec};
use crate::expansions::trig::{default_nodes, parity_decompose, trig_operator_nd};
use crate::net3d::assemble::{Assembler, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

/// Chebyshev terms below this fraction of the largest are dropped before
/// the monomial conversion.
const CHEB_PRUNE: f64 = 1e-15;

/// Operator coefficients below this fraction of the largest are dropped.
const COEFF_PRUNE: f64 = 1e-12;

/// Polynomial Ψ̃ ≈ cos(π·) on [0,1] and the chain height, with total error
/// at most `budget`: half interpolation, half network.
#[derive(Clone, Debug)]
pub(crate) struct CosinePoly {
    pub coeffs: Vec<f64>,
    pub height: usize,
    pub interp_bound: f64,
}

fn cos_interp_bound(m: usize) -> f64 {
    // ‖f^{(m+1)}‖ ≤ π^{m+1} on an interval of length 1
    let mut v = PI / 4.0 * 2.0;
    for k in 1..=m {
        v *= PI / 4.0 / (k + 1) as f64;
    }
    v
}

pub(crate) fn cosine_poly(n2: usize, budget: f64) -> Result<CosinePoly> {
    let mut m = n2 + 1;
    while cos_interp_bound(m) > budget / 2.0 {
        m += 1;
    }
    let target = TargetSpec::catalog(CatalogFn::Cosine { freq: PI }, 1, Domain::UnitCube)?;
    let fit = chebyshev_interpolant_1d(&target, m)?;
    let bmax = fit.cheb.values().map(|b| b.abs()).fold(0.0, f64::max);
    let rows = shifted_chebyshev_monomials(m);
    let mut coeffs = vec![0.0; m + 1];
    for (k, &b) in &fit.cheb {
        if b.abs() > CHEB_PRUNE * bmax {
            for (e, r) in rows[k[0] as usize].iter().enumerate() {
                coeffs[e] += b * r;
            }
        }
    }
    let cmax = coeffs[1..].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let height = min_height(cmax * 3.0 * (m * m) as f64, budget / 2.0);
    Ok(CosinePoly { coeffs, height, interp_bound: cos_interp_bound(m) })
}

/// One cos(kπx) or sin(kπx) unit: the fold sits in the first layer, the
/// polynomial chains in the following ones.
pub(crate) struct TrigUnit {
    chains: Vec<PolyChain>,
}

impl TrigUnit {
    pub fn begin(a: &mut Assembler, x: &Expr, k: usize, kind: TrigKind, psi: &CosinePoly) -> TrigUnit {
        match kind {
            TrigKind::Cos => {
                let y = fold_in(a, x, k, 0);
                TrigUnit { chains: vec![PolyChain::new(y, &psi.coeffs)] }
            }
            TrigKind::Sin => {
                // sin(kπt) = cos(kπ(t − 1/(2k))) for t ≥ 0, odd extension
                let shift = -0.5 / k as f64;
                let pos = a.neuron(0, x);
                let neg = a.neuron(0, &-x.clone());
                let yp = fold_in(a, &pos.shift(shift), k, 1);
                let yn = fold_in(a, &neg.shift(shift), k, 1);
                TrigUnit { chains: vec![PolyChain::new(yp, &psi.coeffs), PolyChain::new(yn, &psi.coeffs)] }
            }
        }
    }

    pub fn steps_left(&self) -> usize {
        self.chains[0].steps_left()
    }

    pub fn step(&mut self, a: &mut Assembler, h: usize) {
        for c in &mut self.chains {
            c.step(a, h);
        }
    }

    pub fn output(&self) -> Expr {
        match self.chains.as_slice() {
            [c] => c.output(),
            [p, n] => p.output() - n.output(),
            _ => unreachable!(),
        }
    }
}

fn unit_width(kind: TrigKind) -> usize {
    match kind {
        TrigKind::Cos => 8,
        TrigKind::Sin => 16,
    }
}

fn fold_floors(k: usize, kind: TrigKind) -> usize {
    ceil_log2(k) + if kind == TrigKind::Sin { 2 } else { 1 }
}

/// Stated height max{N₂+1+⌈log₂(N₂+1)+½log₂3⌉, ⌈log₂k⌉}.
pub fn trig_stated_height(n2: usize, k: usize) -> usize {
    let a = n2 + 1 + ((n2 as f64 + 1.0).log2() + 0.5 * 3f64.log2()).ceil() as usize;
    a.max(ceil_log2(k))
}

/// Ψ_cos or Ψ_sin with sup error ≤ 2^{−N₂} on [−1,1].
pub fn build_trig(k: usize, n2: usize, kind: TrigKind) -> Result<BuildReport> {
    if k == 0 {
        return Err(invalid("frequency k must be at least 1"));
    }
    if n2 == 0 {
        return Err(invalid("N2 must be at least 1"));
    }
    let bound = 2f64.powi(-(n2 as i32));
    // sin is a difference of two shifted cosines
    let part = if kind == TrigKind::Sin { bound / 2.0 } else { bound };
    let psi = cosine_poly(n2, part)?;
    let mut a = Assembler::new(1);
    let x = a.input(0);
    a.begin_layer();
    let mut unit = TrigUnit::begin(&mut a, &x, k, kind, &psi);
    while unit.steps_left() > 0 {
        a.begin_layer();
        unit.step(&mut a, psi.height);
    }
    let net = a.finish(&[unit.output()])?;
    let m = psi.coeffs.len() - 1;
    let height = fold_floors(k, kind).max(psi.height.max(1));
    let inputs = BuildInputs { n2: Some(n2), d: Some(1), k: Some(k), h: Some(psi.height), ..Default::default() };
    let id = match kind {
        TrigKind::Cos => "trig-cos: 2^(−N2)",
        TrigKind::Sin => "trig-sin: 2^(−N2)",
    };
    Ok(BuildReport::new(net, size(unit_width(kind), m, height), bound, id, inputs)
        .diag("frequency", k as f64)
        .diag("interpolation_degree", m as f64)
        .diag("interpolation_bound", psi.interp_bound)
        .stated(size(8, n2 + 1, trig_stated_height(n2, k))))
}

/// Pieces of the L^p bound with the Jackson constant B_r set to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LpBoundTerms {
    pub omega: f64,
    pub lp_norm: f64,
    /// r^d·ω_r(f, 1/N1)_p
    pub jackson_term: f64,
    /// (3d/2)‖f‖_p(4C_r N1)^d 2^{−N2}
    pub network_term: f64,
}

pub fn lp_bound_terms(
    target: &TargetSpec,
    n1: usize,
    n2: usize,
    r: usize,
    p: f64,
    c_r: f64,
    nodes: usize,
) -> Result<LpBoundTerms> {
    let d = target.dimension;
    let omega = modulus_smoothness(target, r, 1.0 / n1 as f64, p, nodes)?;
    let lp_norm = target_lp_norm(target, p, nodes)?;
    let network_term = 1.5 * d as f64 * lp_norm * (4.0 * c_r * n1 as f64).powi(d as i32) * 2f64.powi(-(n2 as i32));
    Ok(LpBoundTerms { omega, lp_norm, jackson_term: (r as f64).powi(d as i32) * omega, network_term })
}

/// ‖f‖_p on its cube by composite Gauss–Legendre quadrature.
pub fn target_lp_norm(target: &TargetSpec, p: f64, nodes: usize) -> Result<f64> {
    let (lo, hi) = target.domain.bounds().ok_or_else(|| invalid("L^p norm needs a bounded domain"))?;
    let d = target.dimension;
    let rule = composite(lo, hi, &target.breakpoints(), nodes, 16);
    let q = rule.len();
    let total = q.checked_pow(d as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| invalid("quadrature grid too large"))?;
    let mut x = vec![0.0; d];
    let s = compensated_sum((0..total).map(|flat| {
        let mut rest = flat;
        let mut w = 1.0;
        for l in (0..d).rev() {
            let (xi, wi) = rule[rest % q];
            x[l] = xi;
            w *= wi;
            rest /= q;
        }
        w * target.eval(&x).abs().powf(p)
    }));
    Ok(s.powf(1.0 / p))
}

/// Factor Ψ_{j}(x_k) of a tensor term: (coordinate, frequency, kind).
type Factor = (usize, usize, TrigKind);

/// Σ_η Σ_j a_j Π_k Ψ_{j_k}(x_k) for the parity components of f on
/// [−1,1]^d, with products through ∏̃_d at M = 2 and height N₁ + 1.
pub fn build_lp(target: &TargetSpec, n1: usize, n2: usize, r: usize, p: f64, width_cap: usize) -> Result<BuildReport> {
    let d = target.dimension;
    if target.domain != (Domain::SymmetricCube { half_width: 1.0 }) {
        return Err(invalid("L^p construction expects the domain [−1,1]^d"));
    }
    if r == 0 || n1 < r {
        return Err(invalid("need 1 ≤ r ≤ N1"));
    }
    if n2 == 0 {
        return Err(invalid("N2 must be at least 1"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p must lie in [1, ∞)"));
    }
    let nodes = default_nodes(d);
    let mut terms: BTreeMap<Vec<Factor>, f64> = BTreeMap::new();
    let mut constant = 0.0;
    let mut max_alpha = 0.0f64;
    let mut all = Vec::new();
    for comp in parity_decompose(target)? {
        let eta = match &comp.function {
            TargetFn::Parity { eta, .. } => eta.clone(),
            _ => unreachable!(),
        };
        let c = trig_operator_nd(&comp, n1, r, &eta, nodes)?;
        max_alpha = max_alpha.max(c.max_alpha());
        for (j, &v) in &c.a {
            let factors: Vec<Factor> = j
                .iter()
                .enumerate()
                .filter(|(k, &jk)| jk > 0 || eta[*k] == 1)
                .map(|(k, &jk)| (k, jk as usize, if eta[k] == 1 { TrigKind::Sin } else { TrigKind::Cos }))
                .collect();
            all.push((factors, v));
        }
    }
    let amax = all.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let mut pruned_mass = 0.0;
    for (factors, v) in all {
        if v.abs() <= COEFF_PRUNE * amax {
            pruned_mass += v.abs();
        } else if factors.is_empty() {
            constant += v;
        } else {
            *terms.entry(factors).or_insert(0.0) += v;
        }
    }
    let mut units_needed: Vec<Factor> = terms.keys().flatten().copied().collect();
    units_needed.sort();
    units_needed.dedup();
    let multi = terms.keys().filter(|f| f.len() >= 2).count();
    let n_cos = units_needed.iter().filter(|f| f.2 == TrigKind::Cos).count();
    let chain_width = 8 * n_cos + 16 * (units_needed.len() - n_cos);
    let product_width = if d >= 2 { 6 * multi + 2 * (terms.len() + units_needed.len()) } else { 0 };
    let estimate = chain_width.max(product_width);
    if estimate > width_cap {
        return Err(Error::WidthCap { estimate, cap: width_cap });
    }

    let psi = cosine_poly(n2, 2f64.powi(-(n2 as i32) - 1))?;
    let mut a = Assembler::new(d);
    let xs = a.inputs();
    let mut depth = 0;
    if !terms.is_empty() {
        depth = psi.coeffs.len() - 1 + d - 1;
        a.begin_layer();
    }
    let mut units: BTreeMap<Factor, TrigUnit> =
        units_needed.iter().map(|&f| (f, TrigUnit::begin(&mut a, &xs[f.0], f.1, f.2, &psi))).collect();
    let m = psi.coeffs.len() - 1;
    for _ in 1..m.min(depth) {
        a.begin_layer();
        for u in units.values_mut() {
            u.step(&mut a, psi.height);
        }
    }
    let mut vals: BTreeMap<Factor, Expr> = units.iter_mut().map(|(f, u)| (*f, u.output() * 0.5)).collect();
    let h_prod = n1;
    let out = if terms.is_empty() {
        Expr::constant(constant)
    } else if d == 1 {
        Expr::sum(terms.iter().map(|(f, c)| (2.0 * c, &vals[&f[0]])), constant)
    } else {
        // partial products keyed by their factor prefix, normalized by 2 per factor
        let mut partial: BTreeMap<Vec<Factor>, Expr> = BTreeMap::new();
        for f in terms.keys() {
            partial.insert(vec![f[0]], vals[&f[0]].clone());
        }
        for stage in 1..d {
            a.begin_layer();
            let mut next: BTreeMap<Vec<Factor>, Expr> = BTreeMap::new();
            for f in terms.keys() {
                let prefix = f[..stage.min(f.len())].to_vec();
                let grown = f[..(stage + 1).min(f.len())].to_vec();
                if next.contains_key(&grown) {
                    continue;
                }
                let e = if grown.len() > prefix.len() {
                    times_sym_in(&mut a, &partial[&prefix], &vals[&f[stage]], h_prod, 0)
                } else {
                    a.carry_signed(0, &partial[&prefix])
                };
                next.insert(grown, e);
            }
            let still: Vec<Factor> =
                terms.keys().filter(|f| f.len() > stage + 1).flat_map(|f| f[stage + 1..].to_vec()).collect();
            let mut carried = BTreeMap::new();
            for fac in still {
                if !carried.contains_key(&fac) {
                    let e = a.carry_signed(0, &vals[&fac]);
                    carried.insert(fac, e);
                }
            }
            vals = carried;
            partial = next;
        }
        Expr::sum(terms.iter().map(|(f, c)| (c * 2f64.powi(f.len() as i32), &partial[f])), constant)
    };
    let net = a.finish(&[out])?;

    let trig_height = units_needed
        .iter()
        .map(|f| fold_floors(f.1, f.2))
        .max()
        .unwrap_or(0)
        .max(if units_needed.is_empty() { 0 } else { psi.height.max(1) });
    let height = if multi > 0 { trig_height.max(h_prod + 1) } else { trig_height };
    let c_r = max_alpha / n1 as f64;
    let LpBoundTerms { omega, lp_norm: norm, jackson_term, network_term } =
        lp_bound_terms(target, n1, n2, r, p, c_r, nodes)?;
    let inputs = BuildInputs { n1: Some(n1), n2: Some(n2), r: Some(r), d: Some(d), h: Some(psi.height), ..Default::default() };
    let stated_w = (2 * n1).pow(d as u32) * (4 + d);
    let stated_h = (n2 + 1 + ((n2 as f64 + 1.0).log2() + 0.5 * 3f64.log2()).ceil() as usize).max(ceil_log2(n1));
    Ok(BuildReport::new(
        net,
        size(estimate, depth, height),
        jackson_term + network_term,
        "lp: r^d·B_r·ω_r(f,1/N1)_p + (3d/2)‖f‖_p(4C_r N1)^d 2^(−N2), B_r fitted",
        inputs,
    )
    .diag("p", p)
    .diag("omega", omega)
    .diag("lp_norm", norm)
    .diag("c_r", c_r)
    .diag("jackson_term", jackson_term)
    .diag("network_term", network_term)
    .diag("terms", terms.len() as f64)
    .diag("trig_units", units_needed.len() as f64)
    .diag("pruned_coeff_mass", pruned_mass)
    .stated(size(stated_w, n2 + d, stated_h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net3d::exact;
    use num_traits::Zero;

    fn sup_on(r: &BuildReport, f: impl Fn(f64) -> f64, n: usize) -> f64 {
        (0..=n)
            .map(|i| -1.0 + 2.0 * i as f64 / n as f64)
            .map(|x| (r.net.evaluate(&[x]).unwrap() - f(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn cosine_at_origin() {
        let r = build_trig(1, 6, TrigKind::Cos).unwrap();
        assert!((r.net.evaluate(&[0.0]).unwrap() - 1.0).abs() <= 2f64.powi(-6));
        assert_eq!(r.metrics.width, 8);
        assert!(r.size_consistent(), "{:?} {:?}", r.metrics, r.expected_metrics);
    }

    #[test]
    fn cosine_three_within_bound() {
        let r = build_trig(3, 8, TrigKind::Cos).unwrap();
        let err = sup_on(&r, |x| (3.0 * PI * x).cos(), 10_000);
        assert!(err <= 2f64.powi(-8), "{err}");
        assert_eq!(r.metrics.depth, 9);
    }

    #[test]
    fn sine_is_odd_and_accurate() {
        for k in [1, 2, 5] {
            let r = build_trig(k, 10, TrigKind::Sin).unwrap();
            let zero = r.net.evaluate_exact(&[exact(0.0)]).unwrap();
            assert!(zero[0].is_zero());
            assert!(r.net.evaluate(&[0.0]).unwrap().abs() < 1e-15);
            let err = sup_on(&r, |x| (k as f64 * PI * x).sin(), 8000);
            assert!(err <= 2f64.powi(-10), "k={k} {err}");
            assert!(r.size_consistent());
        }
    }

    #[test]
    fn lp_reproduces_constant() {
        let t = TargetSpec::catalog(CatalogFn::Constant { value: 0.7 }, 1, Domain::SymmetricCube { half_width: 1.0 })
            .unwrap();
        let r = build_lp(&t, 4, 8, 1, 2.0, 10_000).unwrap();
        for x in [-1.0, 0.0, 0.3] {
            assert!((r.net.evaluate(&[x]).unwrap() - 0.7).abs() < 1e-9);
        }
    }

    #[test]
    fn lp_two_dimensional_sum_of_moduli() {
        let t = TargetSpec::catalog(CatalogFn::AbsSum, 2, Domain::SymmetricCube { half_width: 1.0 }).unwrap();
        let r = build_lp(&t, 4, 8, 2, 2.0, 100_000).unwrap();
        assert_eq!(r.metrics.depth, 10);
        assert!(r.size_consistent(), "{:?} {:?}", r.metrics, r.expected_metrics);
        let v = r.net.evaluate(&[0.5, -0.5]).unwrap();
        assert!((v - 1.0).abs() < 0.2, "{v}");
    }
}
