//! Reusable gadgets: sawtooth, square, products, power chains, folding and
//! clipping windows.
//!
//! The `*_in` functions place a gadget inside the layer currently open in an
//! [`Assembler`], starting at a given floor, and return the output as an
//! expression over the new neurons. The public constructors wrap them into
//! standalone networks.

use crate::error::{invalid, Result};
use crate::net3d::assemble::{Assembler, Expr};
use crate::net3d::Net3D;

/// Parameters shared by the gadget constructors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GadgetParams {
    pub height: usize,
    pub half_width: f64,
    pub arity: usize,
    pub delta: f64,
}

impl GadgetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0) {
            return Err(invalid("half-width M must be positive"));
        }
        if self.arity == 0 {
            return Err(invalid("arity must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < self.half_width) {
            return Err(invalid("clip width must satisfy 0 < delta < M"));
        }
        Ok(())
    }
}

/// Sawtooth functions g_1..g_s of `t` (t in [0,1]) on floors
/// `floor0..floor0+s`. Also returns the first-floor neuron σ(t).
pub(crate) fn saw_in(a: &mut Assembler, t: &Expr, s: usize, floor0: usize) -> (Expr, Vec<Expr>) {
    let first = a.neuron(floor0, t);
    let half = a.neuron(floor0, &t.clone().shift(-0.5));
    let mut g = Vec::with_capacity(s);
    g.push(first.clone() * 2.0 - half * 4.0);
    for k in 1..s {
        let prev = g[k - 1].clone();
        let up = a.neuron(floor0 + k, &prev);
        let down = a.neuron(floor0 + k, &(-prev).shift(0.5));
        // g_1(v) = 2v − 4σ(v − 1/2) rewritten with v = σ(v) on [0,1]
        g.push((up * -2.0 - down * 4.0).shift(2.0));
    }
    (first, g)
}

/// f_H(t) = t − Σ g_j(t)/4^j, the interpolant of t² on the grid of step 2^{−H}.
pub(crate) fn square_in(a: &mut Assembler, t: &Expr, h: usize, floor0: usize) -> Expr {
    if h == 0 {
        return a.neuron(floor0, t);
    }
    let (first, g) = saw_in(a, t, h, floor0);
    let mut parts = vec![(1.0, &first)];
    let mut w = 1.0;
    for gj in &g {
        w /= 4.0;
        parts.push((-w, gj));
    }
    Expr::sum(parts, 0.0)
}

/// ×̂(x, y) = 2 f_H((x+y)/2) − 2 f_H(x/2) − 2 f_H(y/2) for x, y in [0,1].
pub(crate) fn times_in(a: &mut Assembler, x: &Expr, y: &Expr, h: usize, floor0: usize) -> Expr {
    let mid = (x.clone() + y.clone()) * 0.5;
    let s = square_in(a, &mid, h, floor0);
    let sx = square_in(a, &(x.clone() * 0.5), h, floor0);
    let sy = square_in(a, &(y.clone() * 0.5), h, floor0);
    Expr::sum([(2.0, &s), (-2.0, &sx), (-2.0, &sy)], 0.0)
}

/// Approximation of z² for z in [−1,1] through the shifted sawtooth
/// g_{j+1}((z+1)/2) = g_j(|z|); uses H+1 floors.
pub(crate) fn square_sym_in(a: &mut Assembler, z: &Expr, h: usize, floor0: usize) -> Expr {
    let w = (z.clone() + Expr::constant(1.0)) * 0.5;
    let (_, g) = saw_in(a, &w, h + 1, floor0);
    let mut parts = vec![(-1.0, &g[0])];
    let mut c = 1.0;
    for gj in &g[1..] {
        c /= 4.0;
        parts.push((-c, gj));
    }
    Expr::sum(parts, 1.0)
}

/// Product on [−1,1]², built from three symmetric squares.
pub(crate) fn times_sym_in(a: &mut Assembler, x: &Expr, y: &Expr, h: usize, floor0: usize) -> Expr {
    let mid = (x.clone() + y.clone()) * 0.5;
    let s = square_sym_in(a, &mid, h, floor0);
    let sx = square_sym_in(a, &(x.clone() * 0.5), h, floor0);
    let sy = square_sym_in(a, &(y.clone() * 0.5), h, floor0);
    Expr::sum([(2.0, &s), (-2.0, &sx), (-2.0, &sy)], 0.0)
}

/// Smallest s with 2^s ≥ k.
pub(crate) fn ceil_log2(k: usize) -> usize {
    k.next_power_of_two().trailing_zeros() as usize
}

/// g_s((k/2^s)|x|) on floors `floor0..floor0+s+1`; for k = 1 this is |x|.
pub(crate) fn fold_in(a: &mut Assembler, x: &Expr, k: usize, floor0: usize) -> Expr {
    let p = a.neuron(floor0, x);
    let m = a.neuron(floor0, &-x.clone());
    let abs = p + m;
    let s = ceil_log2(k);
    if s == 0 {
        return abs;
    }
    let scale = k as f64 / (1u64 << s) as f64;
    let (_, g) = saw_in(a, &(abs * scale), s, floor0 + 1);
    g[s - 1].clone()
}

/// Clipping window on three floors. Returns (ξ, χ̃): ξ is the identity on
/// [−M+δ, M−δ] and χ̃ is 1 there; both ramp linearly to 0 at ±M and vanish
/// outside. Every path outside [−M, M] ends in a ReLU with negative input,
/// so both outputs are exactly zero there.
pub(crate) fn clip_in(a: &mut Assembler, x: &Expr, m: f64, delta: f64, floor0: usize) -> (Expr, Expr) {
    let c = (m - delta) / delta;
    let up = a.neuron(floor0, x);
    let un = a.neuron(floor0, &-x.clone());
    // fall-off past M − δ on each side, and the combined distance ramp
    let qp = a.neuron(floor0 + 1, &(up.clone() * (1.0 + c)).shift(-c * m));
    let qn = a.neuron(floor0 + 1, &(un.clone() * (1.0 + c)).shift(-c * m));
    let r = a.neuron(floor0 + 1, &(up.clone() + un.clone()).shift(-(m - delta)));
    let xp = a.neuron(floor0 + 2, &(up - qp));
    let xn = a.neuron(floor0 + 2, &(un - qn));
    let chi = a.neuron(floor0 + 2, &(r * (-1.0 / delta)).shift(1.0));
    (xp - xn, chi)
}

/// Product of `ys` (each in [−M, M]) over d−1 new layers; the first new
/// layer is opened by this function. Returns the product expression.
pub(crate) fn product_layers(a: &mut Assembler, ys: &[Expr], h: usize, m: f64) -> Expr {
    let d = ys.len();
    let mut rest: Vec<Expr> = ys.iter().map(|y| y.clone() * (1.0 / m)).collect();
    let mut p = rest.remove(0);
    while !rest.is_empty() {
        a.begin_layer();
        let y = rest.remove(0);
        p = times_sym_in(a, &p, &y, h, 0);
        rest = rest.iter().map(|y| a.carry(0, y, -1.0)).collect();
    }
    p * m.powi(d as i32)
}

pub fn sawtooth_net(s: usize) -> Result<Net3D> {
    if s == 0 {
        return Err(invalid("sawtooth order s must be at least 1"));
    }
    let mut a = Assembler::new(1);
    let x = a.input(0);
    a.begin_layer();
    let (_, g) = saw_in(&mut a, &x, s, 0);
    a.finish(&[g[s - 1].clone()])
}

pub fn square_net(h: usize) -> Result<Net3D> {
    let mut a = Assembler::new(1);
    let x = a.input(0);
    a.begin_layer();
    let f = square_in(&mut a, &x, h, 0);
    a.finish(&[f])
}

pub fn product2_unit(h: usize) -> Result<Net3D> {
    let mut a = Assembler::new(2);
    let (x, y) = (a.input(0), a.input(1));
    a.begin_layer();
    let p = times_in(&mut a, &x, &y, h, 0);
    a.finish(&[p])
}

/// Product of d inputs on [−M, M]^d. For d = 1 this is the identity.
pub fn product_d_net(d: usize, h: usize, m: f64) -> Result<Net3D> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(invalid("half-width M must be positive"));
    }
    if d == 0 {
        return Err(invalid("arity must be at least 1"));
    }
    let mut a = Assembler::new(d);
    let ys = a.inputs();
    if d == 1 {
        return a.finish(&ys);
    }
    let p = product_layers(&mut a, &ys, h, m);
    a.finish(&[p])
}

/// Layers computing h_1..h_n with h_k = ×̂(x, h_{k−1}); the first new layer
/// is opened here when n ≥ 2.
pub(crate) fn power_layers(a: &mut Assembler, x: &Expr, n: usize, h: usize) -> Vec<Expr> {
    let mut hs = vec![x.clone()];
    for _ in 1..n {
        a.begin_layer();
        let next = times_in(a, &hs[0], hs.last().unwrap(), h, 0);
        hs = hs.iter().map(|v| a.carry(0, v, 0.0)).collect();
        hs.push(next);
    }
    hs
}

pub fn power_chain_net(n: usize, h: usize) -> Result<Net3D> {
    if n == 0 {
        return Err(invalid("power chain length must be at least 1"));
    }
    let mut a = Assembler::new(1);
    let x = a.input(0);
    let hs = power_layers(&mut a, &x, n, h);
    a.finish(&hs)
}

pub fn periodic_fold_net(k: usize) -> Result<Net3D> {
    if k == 0 {
        return Err(invalid("fold frequency k must be at least 1"));
    }
    let mut a = Assembler::new(1);
    let x = a.input(0);
    a.begin_layer();
    let g = fold_in(&mut a, &x, k, 0);
    a.finish(&[g])
}

/// Two outputs: ξ(x) and χ̃(x).
pub fn clip_window_net(m: f64, delta: f64) -> Result<Net3D> {
    if !(delta > 0.0 && delta < m && m.is_finite()) {
        return Err(invalid("clip width must satisfy 0 < delta < M"));
    }
    let mut a = Assembler::new(1);
    let x = a.input(0);
    a.begin_layer();
    let (xi, chi) = clip_in(&mut a, &x, m, delta, 0);
    a.finish(&[xi, chi])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net3d::exact;

    fn tent(x: f64) -> f64 {
        1.0 - 2.0 * (x - 0.5).abs()
    }

    fn g_rec(s: usize, x: f64) -> f64 {
        (0..s).fold(x, |v, _| tent(v))
    }

    #[test]
    fn sawtooth_values() {
        let g1 = sawtooth_net(1).unwrap();
        assert_eq!(g1.evaluate(&[0.5]).unwrap(), 1.0);
        assert_eq!(g1.evaluate(&[0.0]).unwrap(), 0.0);
        assert_eq!(g1.evaluate(&[1.0]).unwrap(), 0.0);
        let g2 = sawtooth_net(2).unwrap();
        assert_eq!(g2.evaluate(&[0.25]).unwrap(), 1.0);
        assert_eq!(g2.evaluate(&[0.5]).unwrap(), 0.0);
        let g3 = sawtooth_net(3).unwrap();
        for x in [0.125, 0.375, 0.625, 0.875] {
            assert_eq!(g3.evaluate(&[x]).unwrap(), 1.0);
        }
        assert!(sawtooth_net(0).is_err());
    }

    #[test]
    fn sawtooth_matches_recursion_everywhere() {
        for s in 1..=6 {
            let g = sawtooth_net(s).unwrap();
            for i in 0..=10_000 {
                let x = i as f64 / 10_000.0;
                let want = g_rec(s, x);
                assert!((g.evaluate(&[x]).unwrap() - want).abs() < 1e-12, "s={s} x={x}");
            }
            // dyadic points: exact in both paths
            for l in 0..=(1 << s) {
                let x = l as f64 / (1 << s) as f64;
                assert_eq!(g.evaluate(&[x]).unwrap(), g_rec(s, x));
            }
        }
    }

    #[test]
    fn sawtooth_sizes() {
        for s in 1..=5 {
            let m = sawtooth_net(s).unwrap().metrics();
            assert_eq!((m.width, m.depth, m.height), (2, 1, s));
        }
        // hand count: floor 1 has 2 weights + 1 bias, floor 2 has 4 links + 1 bias,
        // later floors 4 links + 2 biases, readout 2 weights (+1 bias from s = 2 on)
        assert_eq!(sawtooth_net(1).unwrap().metrics().param_count, 5);
        assert_eq!(sawtooth_net(2).unwrap().metrics().param_count, 3 + 5 + 3);
        assert_eq!(sawtooth_net(3).unwrap().metrics().param_count, 3 + 5 + 6 + 3);
    }

    #[test]
    fn square_values_and_sizes() {
        let f0 = square_net(0).unwrap();
        assert_eq!(f0.evaluate(&[0.3]).unwrap(), 0.3);
        let f2 = square_net(2).unwrap();
        assert_eq!(f2.evaluate(&[0.25]).unwrap(), 0.0625);
        for l in 0..=4 {
            let x = l as f64 / 4.0;
            assert_eq!(f2.evaluate(&[x]).unwrap(), x * x);
        }
        for h in 1..=6 {
            let m = square_net(h).unwrap().metrics();
            assert_eq!((m.depth, m.height), (1, h));
            assert!(m.width <= 2);
        }
        // H = 0: one neuron (1 weight) and one readout weight
        assert_eq!(square_net(0).unwrap().metrics().param_count, 2);
        // H = 1: sawtooth hidden part 3, readout σ(x)/2 + σ(x − 1/2)
        assert_eq!(square_net(1).unwrap().metrics().param_count, 5);
        // H = 3: hidden 3 + 5 + 6, readout 6 weights + bias
        assert_eq!(square_net(3).unwrap().metrics().param_count, 14 + 7);
    }

    #[test]
    fn square_exact_at_midpoint_errors() {
        for h in 1..=8usize {
            let f = square_net(h).unwrap();
            let step = 1.0 / (1u64 << h) as f64;
            for l in 0..(1usize << h) {
                let mid = (l as f64 + 0.5) * step;
                let err = f.evaluate(&[mid]).unwrap() - mid * mid;
                assert_eq!(err, step * step / 4.0);
                let e = f.evaluate_exact(&[exact(mid)]).unwrap().pop().unwrap();
                assert_eq!(e - exact(mid) * exact(mid), exact(step * step / 4.0));
            }
        }
    }

    #[test]
    fn product_unit_properties() {
        let h = 4;
        let p = product2_unit(h).unwrap();
        let m = p.metrics();
        assert_eq!((m.width, m.depth, m.height), (6, 1, h));
        // floor 1: 5 + 3 + 3, floor 2: 3·5, floors 3..4: 3·6 each, readout 6H + bias
        assert_eq!(m.param_count, 11 + 15 + 36 + 24 + 1);
        let n = 1usize << h;
        for j in (0..=n).step_by(2) {
            for k in (0..=n).step_by(2) {
                let (x, y) = (j as f64 / n as f64, k as f64 / n as f64);
                assert!((p.evaluate(&[x, y]).unwrap() - x * y).abs() <= 1e-12);
                let e = p.evaluate_exact(&[exact(x), exact(y)]).unwrap().pop().unwrap();
                assert_eq!(e, exact(x) * exact(y));
            }
        }
        for i in 0..=50 {
            let y = i as f64 / 50.0;
            assert!(p.evaluate(&[0.0, y]).unwrap().abs() <= 1e-12);
            let e = p.evaluate_exact(&[exact(0.0), exact(y)]).unwrap().pop().unwrap();
            assert_eq!(e, exact(0.0));
        }
    }

    #[test]
    fn product_d_sizes_and_values() {
        for d in 2..=5 {
            let m = product_d_net(d, 3, 1.0).unwrap().metrics();
            assert_eq!((m.width, m.depth, m.height), (4 + d, d - 1, 4));
        }
        let p2 = product_d_net(2, 6, 1.0).unwrap();
        assert!((p2.evaluate(&[-1.0, 1.0]).unwrap() + 1.0).abs() <= 6.0 * 2f64.powi(-14));
        let p3 = product_d_net(3, 4, 2.0).unwrap();
        assert_eq!(p3.evaluate(&[0.0, 0.5, -1.5]).unwrap(), 0.0);
        let id = product_d_net(1, 4, 2.0).unwrap();
        assert_eq!(id.evaluate(&[1.25]).unwrap(), 1.25);
        assert!(product_d_net(2, 3, 0.0).is_err());
    }

    #[test]
    fn power_chain_nodes() {
        let net = power_chain_net(4, 5).unwrap();
        let at1 = net.evaluate_all(&[1.0]).unwrap();
        assert_eq!(at1, vec![1.0; 4]);
        let v = net.evaluate_all(&[0.5]).unwrap();
        assert_eq!(v[0], 0.5);
        assert!((v[1] - 0.25).abs() <= 6.0 * 2f64.powi(-12));
        assert_eq!(net.metrics().depth, 3);
    }

    #[test]
    fn fold_values() {
        let f1 = periodic_fold_net(1).unwrap();
        assert_eq!(f1.evaluate(&[-0.5]).unwrap(), 0.5);
        assert_eq!(f1.metrics().height, 1);
        assert_eq!(periodic_fold_net(2).unwrap().evaluate(&[0.5]).unwrap(), 1.0);
        assert_eq!(periodic_fold_net(4).unwrap().evaluate(&[1.0]).unwrap(), 0.0);
        let f3 = periodic_fold_net(3).unwrap();
        assert_eq!(f3.metrics().height, 3);
        for i in 0..=200 {
            let x = -1.0 + i as f64 / 100.0;
            let c = (std::f64::consts::PI * f3.evaluate(&[x]).unwrap()).cos();
            assert!((c - (3.0 * std::f64::consts::PI * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn clip_window_shape() {
        let (m, d) = (4.0, 0.5);
        let net = clip_window_net(m, d).unwrap();
        let at = |x: f64| net.evaluate_all(&[x]).unwrap();
        assert_eq!(at(0.0), vec![0.0, 1.0]);
        assert_eq!(at(m), vec![0.0, 0.0]);
        assert_eq!(at(-m), vec![0.0, 0.0]);
        assert_eq!(at(m + 1.0), vec![0.0, 0.0]);
        assert_eq!(at(-m - 7.3), vec![0.0, 0.0]);
        let v = at(m - d / 2.0);
        assert!((v[0] - (m - d) / 2.0).abs() < 1e-12);
        assert!((v[1] - 0.5).abs() < 1e-12);
        let v = at(-(m - d / 2.0));
        assert!((v[0] + (m - d) / 2.0).abs() < 1e-12);
        assert!((at(2.5)[0] - 2.5).abs() < 1e-12);
        assert!(clip_window_net(1.0, 1.0).is_err());
    }
}
