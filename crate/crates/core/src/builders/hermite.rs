//! Clipped Hermite nets and Gaussian-L² approximation on ℝ^d.

use serde::Serialize;

use super::{size, BuildInputs, BuildReport};
use crate::blocks::{clip_in, times_sym_in};
use crate::error::{invalid, Result};
use crate::expansions::hermite::{default_order, hermite_expansion, hermite_poly_coeffs};
use crate::expansions::poly::MultiIndex;
use crate::expansions::target::TargetSpec;
use crate::net3d::assemble::{Assembler, Expr};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HermiteParams {
    pub n: usize,
    pub b: f64,
    pub half_width: f64,
    /// Height used by the chain: ⌈h_star⌉.
    pub height: usize,
    /// Real root of (√6M)^n·3n²·2^{−2(H+1)} = (3/5)e^{−B√n}.
    pub h_star: f64,
    /// Closed-form ½n·log₂(√6M) + log₂(5n/4) + (B log₂e/2)√n.
    pub h_stated: f64,
    pub delta: f64,
}

fn interior_term(n: usize, m: f64, h: f64) -> f64 {
    let nf = n as f64;
    (6f64.sqrt() * m).powf(nf) * 3.0 * nf * nf * 2f64.powf(-2.0 * (h + 1.0))
}

fn std_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Squared L²(γ₁) mass of Ξ̃_n − Ξ_n over the two transition bands.
fn transition_mass(n: usize, m: f64, delta: f64) -> f64 {
    let amp = 1.0 + 3.0 * (6f64.sqrt() * m).powi(n as i32);
    2.0 * delta * std_pdf(m - delta) * amp * amp
}

/// M, H and δ for the degree-n clipped Hermite net at rate B.
pub fn choose_hermite_params(n: usize, b: f64) -> Result<HermiteParams> {
    if n == 0 {
        return Err(invalid("Hermite degree must be at least 1"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid("rate B must be positive"));
    }
    let nf = n as f64;
    let sq = nf.sqrt();
    let m = (12.0 * nf * (6.0 * nf).ln() + 24.0 * b * sq).sqrt();
    let goal = (-b * sq).exp();
    let h_star = 0.5 * (interior_term(n, m, -1.0) / (0.6 * goal)).log2() - 1.0;
    let h_stated = 0.5 * nf * (6f64.sqrt() * m).log2() + (1.25 * nf).log2() + 0.5 * b * LOG2_E * sq;
    // transition band gets a tenth of the budget
    let allowed = (0.1 * goal).powi(2);
    let mut delta = m / 2.0;
    while transition_mass(n, m, delta) > allowed && delta > 1e-300 {
        delta /= 2.0;
    }
    Ok(HermiteParams { n, b, half_width: m, height: h_star.ceil().max(0.0) as usize, h_star, h_stated, delta })
}

/// The inequalities behind the parameter choice, evaluated numerically.
#[derive(Clone, Debug, Serialize)]
pub struct HermiteProofChain {
    pub params: HermiteParams,
    /// e^{−B√n}
    pub rate: f64,
    pub interior_at_h_star: f64,
    pub interior_at_height: f64,
    pub interior_at_stated: f64,
    /// (1/√(2π))(√(6n)M)^n e^{−M²/4}
    pub tail_term: f64,
    pub transition_term: f64,
}

pub fn hermite_proof_chain(n: usize, b: f64) -> Result<HermiteProofChain> {
    let p = choose_hermite_params(n, b)?;
    let nf = n as f64;
    let m = p.half_width;
    let tail_term = ((6.0 * nf).sqrt() * m).powf(nf) * (-m * m / 4.0).exp()
        / (2.0 * std::f64::consts::PI).sqrt();
    Ok(HermiteProofChain {
        rate: (-b * nf.sqrt()).exp(),
        interior_at_h_star: interior_term(n, m, p.h_star),
        interior_at_height: interior_term(n, m, p.height as f64),
        interior_at_stated: interior_term(n, m, p.h_stated.ceil()),
        tail_term,
        transition_term: transition_mass(n, m, p.delta).sqrt(),
        params: p,
    })
}

/// Chain of scaled powers on one clipped coordinate. After `begin` the
/// current layer holds the clip window; each `step` opens nothing and adds
/// p_{l+1} = M^{l+1}·∏̃₂(u/M, p_l/M^l) to the open layer while carrying u,
/// χ̃ and every accumulator.
struct HermiteChain {
    m: f64,
    u: Expr,
    chi: Expr,
    last: Expr,
    level: usize,
    /// (weights w_j, partial sum, bound on |partial sum|)
    accs: Vec<(Vec<f64>, Expr, f64)>,
}

impl HermiteChain {
    fn begin(a: &mut Assembler, x: &Expr, m: f64, delta: f64, weights: Vec<Vec<f64>>) -> HermiteChain {
        let (u, chi) = clip_in(a, x, m, delta, 0);
        let accs = weights
            .into_iter()
            .map(|w| {
                let w1 = w.get(1).copied().unwrap_or(0.0);
                let e = Expr::sum([(w[0], &chi), (w1, &u)], 0.0);
                let bound = w[0].abs() + w1.abs() * m;
                (w, e, bound)
            })
            .collect();
        HermiteChain { m, last: u.clone(), u, chi, level: 1, accs }
    }

    fn step(&mut self, a: &mut Assembler, h: usize) {
        let m = self.m;
        let l = self.level;
        let scaled_prev = self.last.clone() * m.powi(-(l as i32));
        let prod = times_sym_in(a, &(self.u.clone() * (1.0 / m)), &scaled_prev, h, 0);
        let next = prod * m.powi(l as i32 + 1);
        self.u = a.carry(0, &self.u, -m);
        self.chi = a.carry(1, &self.chi, 0.0);
        for (w, e, bound) in &mut self.accs {
            let carried = a.carry(0, e, -*bound - 1.0);
            let wl = w.get(l + 1).copied().unwrap_or(0.0);
            *e = Expr::sum([(1.0, &carried), (wl, &next)], 0.0);
            *bound += wl.abs() * m.powi(l as i32 + 1);
        }
        self.last = next;
        self.level += 1;
    }

    fn outputs(&self) -> Vec<Expr> {
        self.accs.iter().map(|(_, e, _)| e.clone()).collect()
    }

    fn bound(&self) -> f64 {
        self.accs.iter().map(|t| t.2).fold(0.0, f64::max)
    }
}

/// σ(v − K·off) − σ(−v − K·off) on `floor`: equals v where off = 0 and
/// vanishes exactly where off ≥ 1, provided |v| < K.
fn gate_in(a: &mut Assembler, v: &Expr, off: &Expr, k: f64, floor: usize) -> Expr {
    let p = a.neuron(floor, &Expr::sum([(1.0, v), (-k, off)], 0.0));
    let n = a.neuron(floor, &Expr::sum([(-1.0, v), (-k, off)], 0.0));
    p - n
}

fn outside(chi: &Expr) -> Expr {
    (-chi.clone()).shift(1.0)
}

fn check_window(n: usize, m: f64, delta: f64) -> Result<()> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(invalid("half-width M must be at least 1"));
    }
    if !(delta > 0.0 && delta < m) {
        return Err(invalid("transition width must satisfy 0 < delta < M"));
    }
    if n > 60 {
        return Err(invalid("Hermite degree above 60 is not supported"));
    }
    Ok(())
}

fn chain_height(n: usize, h: usize) -> usize {
    if n >= 2 {
        (h + 2).max(3)
    } else {
        3
    }
}

/// Ξ̃_n: Ξ_n on [−M+δ, M−δ] up to the product error, exactly zero outside
/// [−M, M], linear transition in between.
pub fn build_clipped_hermite(n: usize, m: f64, delta: f64, h: usize) -> Result<BuildReport> {
    check_window(n, m, delta)?;
    let c = hermite_poly_coeffs(n);
    let mut a = Assembler::new(1);
    let x = a.input(0);
    a.begin_layer();
    let mut chain = HermiteChain::begin(&mut a, &x, m, delta, vec![c]);
    for _ in 1..n.max(1) {
        a.begin_layer();
        chain.step(&mut a, h);
    }
    let mut out = chain.outputs().remove(0);
    if n >= 2 {
        out = gate_in(&mut a, &out, &outside(&chain.chi), chain.bound() + 1.0, h + 1);
    }
    let net = a.finish(&[out])?;
    let amp = (6f64.sqrt() * m).powi(n as i32);
    let bound = interior_term(n, m, h as f64);
    let inputs = BuildInputs { n: Some(n), h: Some(h), delta: Some(delta), half_width: Some(m), ..Default::default() };
    let expected = size(8, n.max(1), chain_height(n, h));
    Ok(BuildReport::new(net, expected, bound, "clipped-hermite: (√6M)^n·3n²·2^(−2(H+1)) on [−M+δ, M−δ]", inputs)
        .diag("global_bound", 1.0 + amp)
        .diag("transition_bound", 1.0 + 2.0 * amp))
}

/// Stated height of the Gaussian-L² construction.
pub fn hermite_stated_height(n: usize, d: usize, b: f64) -> f64 {
    let nf = n as f64;
    let inner = (2.0 * nf * (6.0 * nf).ln() + 4.0 * b * nf.sqrt()).sqrt();
    0.5 * d as f64 * nf * (1.0 + 6.0 * inner).log2() + (1.25 * nf).log2() + 0.5 * b * LOG2_E * nf.sqrt()
}

/// Stated width max{8Nd, N^d(4+d)}.
pub fn hermite_stated_width(n: usize, d: usize) -> usize {
    (8 * n * d).max(n.pow(d as u32) * (4 + d))
}

fn all_indices(n: usize, d: usize) -> Vec<MultiIndex> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: MultiIndex| {
                (0..=n as u32).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Network for Σ_{0≤ν≤N} ⟨f, Ξ_ν⟩ ∏̃_d(Ξ̃_{ν_1}(x_1), …, Ξ̃_{ν_d}(x_d)).
/// For d = 1 the coefficients are folded into a single chain.
pub fn build_hermite_gauss(target: &TargetSpec, n: usize, d: usize, beta: &[f64]) -> Result<BuildReport> {
    if beta.len() != d || beta.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(invalid("beta needs d positive entries"));
    }
    if target.dimension != d {
        return Err(invalid("target dimension differs from d"));
    }
    let b = beta.iter().product::<f64>().powf(1.0 / d as f64) / 2f64.sqrt();
    let p = choose_hermite_params(n, b)?;
    let (m, delta, h) = (p.half_width, p.delta, p.height);
    let exp = hermite_expansion(target, n, d, default_order(n))?;
    if exp.coeffs.values().any(|c| !c.is_finite()) {
        return Err(invalid("Hermite coefficient quadrature produced non-finite values"));
    }
    let basis: Vec<Vec<f64>> = (0..=n).map(hermite_poly_coeffs).collect();
    let mut a = Assembler::new(d);
    let xs = a.inputs();
    a.begin_layer();
    let stated_h = hermite_stated_height(n, d, b);
    let mut h2 = 0;
    let (out, expected_width, height) = if d == 1 {
        let mut w = vec![0.0; n + 1];
        for (nu, f) in &exp.coeffs {
            for (j, cj) in basis[nu[0] as usize].iter().enumerate() {
                w[j] += f * cj;
            }
        }
        let mut chain = HermiteChain::begin(&mut a, &xs[0], m, delta, vec![w]);
        for _ in 1..n {
            a.begin_layer();
            chain.step(&mut a, h);
        }
        let mut out = chain.outputs().remove(0);
        if n >= 2 {
            out = gate_in(&mut a, &out, &outside(&chain.chi), chain.bound() + 1.0, h + 1);
        }
        (out, 8, chain_height(n, h))
    } else {
        let mut chains: Vec<HermiteChain> =
            xs.iter().map(|x| HermiteChain::begin(&mut a, x, m, delta, basis.clone())).collect();
        for _ in 1..n {
            a.begin_layer();
            for c in &mut chains {
                c.step(&mut a, h);
            }
        }
        // |Ξ̃_ν| ≤ 1 + (√6M)^ν on the whole line
        let mp = 1.0 + (6f64.sqrt() * m).powi(n as i32);
        h2 = stated_h.ceil().max(0.0) as usize;
        let vals: Vec<Vec<Expr>> =
            chains.iter().map(|c| c.outputs().into_iter().map(|e| e * (1.0 / mp)).collect()).collect();
        let mut partial: Vec<(MultiIndex, Expr)> =
            vals[0].iter().enumerate().map(|(k, e)| (vec![k as u32], e.clone())).collect();
        let mut rest: Vec<Vec<Expr>> = vals[1..].to_vec();
        let mut chis: Vec<Expr> = chains.iter().map(|c| c.chi.clone()).collect();
        let mut width = d * (8 + n);
        while !rest.is_empty() {
            a.begin_layer();
            let coord = rest.remove(0);
            let mut next = Vec::with_capacity(partial.len() * coord.len());
            for (nu, pe) in &partial {
                for (k, ye) in coord.iter().enumerate() {
                    let mut nu2 = nu.clone();
                    nu2.push(k as u32);
                    next.push((nu2, times_sym_in(&mut a, pe, ye, h2, 0)));
                }
            }
            rest = rest.iter().map(|v| v.iter().map(|y| a.carry_signed(0, y)).collect()).collect();
            chis = chis.iter().map(|c| a.carry(1, c, 0.0)).collect();
            width = width.max(6 * next.len() + (2 * (n + 1) * rest.len()).max(d));
            partial = next;
        }
        let scale = mp.powi(d as i32);
        let out = Expr::sum(partial.iter().map(|(nu, e)| (exp.coeffs[nu] * scale, e)), 0.0);
        // products stay within [−1, 1] up to the gadget error
        let k = 2.0 * scale * exp.abs_sum() + 1.0;
        let off = Expr::sum(chis.iter().map(|c| (1.0, c)), 0.0).scale(-1.0).shift(d as f64);
        let out = gate_in(&mut a, &out, &off, k, h2 + 1);
        (out, width, chain_height(n, h).max(h2 + 2))
    };
    let net = a.finish(&[out])?;
    let depth = n.max(1) + d - 1;
    let inputs = BuildInputs {
        n: Some(n),
        h: Some(h),
        delta: Some(delta),
        beta: Some(beta.to_vec()),
        d: Some(d),
        half_width: Some(m),
        ..Default::default()
    };
    let rate = (-b * (n as f64).sqrt()).exp();
    let all = all_indices(n, d);
    debug_assert_eq!(all.len(), exp.coeffs.len());
    let report = BuildReport::new(net, size(expected_width, depth, height), rate, "hermite: C·e^(−B√N), C fitted", inputs)
        .diag("rate_b", b)
        .diag("coeff_abs_sum", exp.abs_sum())
        .diag("chain_height", h as f64)
        .diag("h_star", p.h_star)
        .diag("stated_height_raw", stated_h)
        .diag("product_height", h2 as f64)
        .stated(size(hermite_stated_width(n, d), n + d - 1, stated_h.ceil().max(0.0) as usize));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::hermite::hermite_eval;
    use crate::expansions::target::{CatalogFn, Domain};

    #[test]
    fn clipped_vanishes_outside_support() {
        for n in 0..=5 {
            let r = build_clipped_hermite(n, 4.0, 0.5, 8).unwrap();
            for x in [5.0, -5.0, 4.0, -4.0, 100.0] {
                assert_eq!(r.net.evaluate(&[x]).unwrap(), 0.0, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn degree_zero_is_the_window() {
        let r = build_clipped_hermite(0, 4.0, 0.5, 8).unwrap();
        assert_eq!(r.net.evaluate(&[0.0]).unwrap(), 1.0);
        assert_eq!(r.net.evaluate(&[3.5]).unwrap(), 1.0);
        assert!((r.net.evaluate(&[3.75]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn interior_error_within_bound() {
        let r = build_clipped_hermite(2, 4.0, 0.5, 10).unwrap();
        let bound = (6f64.sqrt() * 4.0).powi(2) * 12.0 * 2f64.powi(-22);
        assert!((r.theoretical_bound - bound).abs() < 1e-15);
        let mut worst = 0.0f64;
        for i in 0..=7000 {
            let x = -3.5 + 7.0 * i as f64 / 7000.0;
            worst = worst.max((r.net.evaluate(&[x]).unwrap() - hermite_eval(2, x)).abs());
        }
        assert!(worst <= bound, "{worst} > {bound}");
        assert_eq!(r.metrics.width, 8);
        assert!(r.size_consistent());
    }

    #[test]
    fn parameter_chain_hits_three_fifths() {
        for n in 1..=10 {
            let c = hermite_proof_chain(n, 1.0).unwrap();
            assert!((c.interior_at_h_star / (0.6 * c.rate) - 1.0).abs() < 1e-9);
            assert!(c.interior_at_height <= 0.6 * c.rate);
            assert!(c.transition_term <= 0.1 * c.rate);
            assert!(c.params.h_stated >= c.params.h_star);
        }
    }

    #[test]
    fn constant_target_gives_scaled_window() {
        let t = TargetSpec::catalog(CatalogFn::Constant { value: 2.0 }, 1, Domain::GaussianLine).unwrap();
        let r = build_hermite_gauss(&t, 2, 1, &[1.0]).unwrap();
        assert!((r.net.evaluate(&[0.0]).unwrap() - 2.0).abs() < 1e-9);
        let m = r.inputs.half_width.unwrap();
        assert_eq!(r.net.evaluate(&[m + 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn two_dimensional_cosine_is_close_at_origin() {
        let t = TargetSpec::catalog(CatalogFn::Cosine { freq: 1.0 }, 2, Domain::GaussianLine).unwrap();
        let r = build_hermite_gauss(&t, 2, 2, &[1.0, 1.0]).unwrap();
        assert_eq!(r.metrics.depth, 3);
        assert!(r.size_consistent(), "{:?} vs {:?}", r.metrics, r.expected_metrics);
        let v = r.net.evaluate(&[0.3, -0.2]).unwrap();
        let exp = hermite_expansion(&t, 2, 2, 40).unwrap().eval(&[0.3, -0.2]);
        assert!((v - exp).abs() < 1e-3, "{v} vs {exp}");
    }
}
