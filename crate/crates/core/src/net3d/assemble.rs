//! Incremental construction of networks from symbolic affine expressions.
//!
//! An [`Expr`] is an affine form over neuron outputs (or inputs). Adding a
//! neuron splits its pre-activation into inbound weights (terms on the
//! previous layer) and intra-links (terms on earlier neurons of the layer
//! being built).

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::{Floor, IntraLink, Layer, Net3D, Neuron, Readout};
use crate::error::Result;

/// Layer 0 denotes the network inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Src {
    layer: usize,
    floor: usize,
    index: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Expr {
    terms: Vec<(Src, f64)>,
    constant: f64,
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr { terms: vec![], constant: c }
    }

    fn var(src: Src) -> Expr {
        Expr { terms: vec![(src, 1.0)], constant: 0.0 }
    }

    pub fn shift(mut self, c: f64) -> Expr {
        self.constant += c;
        self
    }

    pub fn scale(mut self, c: f64) -> Expr {
        for t in &mut self.terms {
            t.1 *= c;
        }
        self.constant *= c;
        self
    }

    /// Σ c_k e_k + bias, with duplicate sources merged.
    pub fn sum<'a, I>(parts: I, bias: f64) -> Expr
    where
        I: IntoIterator<Item = (f64, &'a Expr)>,
    {
        let mut map: BTreeMap<Src, f64> = BTreeMap::new();
        let mut constant = bias;
        for (c, e) in parts {
            for &(s, w) in &e.terms {
                *map.entry(s).or_insert(0.0) += c * w;
            }
            constant += c * e.constant;
        }
        Expr { terms: map.into_iter().filter(|(_, w)| *w != 0.0).collect(), constant }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([(1.0, &self), (1.0, &rhs)], 0.0)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([(1.0, &self), (-1.0, &rhs)], 0.0)
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(self, c: f64) -> Expr {
        self.scale(c)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-1.0)
    }
}

pub(crate) struct Assembler {
    input_dim: usize,
    done: Vec<Layer>,
    offsets: Vec<Vec<usize>>,
    cur: Option<Vec<Vec<Neuron>>>,
}

impl Assembler {
    pub fn new(input_dim: usize) -> Assembler {
        Assembler { input_dim, done: vec![], offsets: vec![], cur: None }
    }

    pub fn input(&self, i: usize) -> Expr {
        assert!(i < self.input_dim, "input {i} out of range");
        Expr::var(Src { layer: 0, floor: 0, index: i })
    }

    pub fn inputs(&self) -> Vec<Expr> {
        (0..self.input_dim).map(|i| self.input(i)).collect()
    }

    fn commit(&mut self) {
        if let Some(floors) = self.cur.take() {
            let mut acc = 0;
            let offs = floors
                .iter()
                .map(|f| {
                    let o = acc;
                    acc += f.len();
                    o
                })
                .collect();
            self.offsets.push(offs);
            self.done.push(Layer {
                floors: floors.into_iter().map(|neurons| Floor { neurons }).collect(),
            });
        }
    }

    pub fn begin_layer(&mut self) {
        self.commit();
        self.cur = Some(vec![]);
    }

    fn flat(&self, s: Src) -> usize {
        if s.layer == 0 {
            s.index
        } else {
            self.offsets[s.layer - 1][s.floor] + s.index
        }
    }

    /// σ(pre) placed on `floor` of the layer under construction.
    pub fn neuron(&mut self, floor: usize, pre: &Expr) -> Expr {
        let layer = self.done.len() + 1;
        let pre = Expr::sum([(1.0, pre)], 0.0);
        let mut weights = Vec::new();
        let mut intra = Vec::new();
        let floors = self.cur.as_ref().expect("begin_layer must precede neuron");
        let index = floors.get(floor).map_or(0, Vec::len);
        for &(s, w) in &pre.terms {
            if s.layer + 1 == layer {
                weights.push((self.flat(s), w));
            } else if s.layer == layer {
                assert!(
                    (s.floor, s.index) < (floor, index),
                    "intra source ({}, {}) does not precede ({floor}, {index})",
                    s.floor,
                    s.index
                );
                intra.push(IntraLink { floor: s.floor, index: s.index, coeff: w });
            } else {
                panic!("term from layer {} used while building layer {layer}", s.layer);
            }
        }
        weights.sort_by_key(|t| t.0);
        let floors = self.cur.as_mut().unwrap();
        while floors.len() <= floor {
            floors.push(vec![]);
        }
        floors[floor].push(Neuron { weights, bias: pre.constant, intra });
        Expr::var(Src { layer, floor, index })
    }

    /// Pass a value through ReLU unchanged, given a lower bound `lo` on it.
    pub fn carry(&mut self, floor: usize, e: &Expr, lo: f64) -> Expr {
        self.neuron(floor, &e.clone().shift(-lo)).shift(lo)
    }

    /// Pass a value of either sign through as σ(e) − σ(−e).
    pub fn carry_signed(&mut self, floor: usize, e: &Expr) -> Expr {
        let p = self.neuron(floor, e);
        let m = self.neuron(floor, &-e.clone());
        p - m
    }

    pub fn finish(mut self, outputs: &[Expr]) -> Result<Net3D> {
        self.commit();
        let last = self.done.len();
        let readout = outputs
            .iter()
            .map(|e| {
                let e = Expr::sum([(1.0, e)], 0.0);
                let mut weights: Vec<(usize, f64)> = e
                    .terms
                    .iter()
                    .map(|&(s, w)| {
                        assert_eq!(s.layer, last, "readout term not on the last layer");
                        (self.flat(s), w)
                    })
                    .collect();
                weights.sort_by_key(|t| t.0);
                Readout { weights, bias: e.constant }
            })
            .collect();
        Net3D::new(self.input_dim, self.done, readout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intra_and_inbound_split() {
        let mut a = Assembler::new(1);
        let x = a.input(0);
        a.begin_layer();
        let p = a.neuron(0, &x);
        let q = a.neuron(1, &(p.clone() * 2.0).shift(-1.0));
        let net = a.finish(&[p + q]).unwrap();
        // σ(x) + σ(2σ(x) − 1)
        assert_eq!(net.evaluate(&[0.75]).unwrap(), 0.75 + 0.5);
        assert_eq!(net.evaluate(&[-1.0]).unwrap(), 0.0);
        assert_eq!(net.metrics().height, 2);
    }

    #[test]
    fn carries_cross_layers() {
        let mut a = Assembler::new(1);
        let x = a.input(0);
        a.begin_layer();
        let c = a.carry_signed(0, &x);
        a.begin_layer();
        let c2 = a.carry(0, &c, -5.0);
        let net = a.finish(&[c2]).unwrap();
        assert_eq!(net.evaluate(&[-2.5]).unwrap(), -2.5);
        assert_eq!(net.metrics().depth, 2);
    }

    #[test]
    fn merged_terms_cancel() {
        let mut a = Assembler::new(1);
        let x = a.input(0);
        a.begin_layer();
        let p = a.neuron(0, &x);
        let net = a.finish(&[p.clone() - p.shift(1.0)]).unwrap();
        assert!(net.readout()[0].weights.is_empty());
        assert_eq!(net.evaluate(&[3.0]).unwrap(), -1.0);
    }
}
