//! Flat form of a network for batch evaluation.
//!
//! Inputs and every hidden neuron share one activation buffer. Each neuron
//! reads absolute buffer slots, so previous-layer weights and intra-layer
//! links are one sparse row. Points are evaluated in blocks of `LANES` with
//! the lane index innermost.

use super::{Layer, Readout};

pub(crate) const LANES: usize = 8;

#[derive(Clone, Debug, PartialEq, Default)]
pub(crate) struct Packed {
    input_dim: usize,
    slots: usize,
    starts: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    bias: Vec<f64>,
    out_cols: Vec<u32>,
    out_vals: Vec<f64>,
    out_bias: f64,
}

impl Packed {
    /// Packs the first readout only; `None` for multi-output nets.
    pub(crate) fn new(input_dim: usize, layers: &[Layer], offsets: &[Vec<usize>], readout: &[Readout]) -> Option<Packed> {
        if readout.len() != 1 {
            return None;
        }
        let mut p = Packed { input_dim, starts: vec![0], ..Default::default() };
        let mut prev_base = 0usize;
        let mut base = input_dim;
        for (l, layer) in layers.iter().enumerate() {
            for floor in &layer.floors {
                for n in &floor.neurons {
                    for &(j, w) in &n.weights {
                        p.cols.push((prev_base + j) as u32);
                        p.vals.push(w);
                    }
                    for link in &n.intra {
                        p.cols.push((base + offsets[l][link.floor] + link.index) as u32);
                        p.vals.push(link.coeff);
                    }
                    p.starts.push(p.cols.len() as u32);
                    p.bias.push(n.bias);
                }
            }
            prev_base = base;
            base += layer.len();
        }
        p.slots = base;
        let r = &readout[0];
        p.out_cols = r.weights.iter().map(|&(j, _)| (prev_base + j) as u32).collect();
        p.out_vals = r.weights.iter().map(|&(_, w)| w).collect();
        p.out_bias = r.bias;
        Some(p)
    }

    pub(crate) fn scratch(&self) -> Vec<f64> {
        vec![0.0; self.slots * LANES]
    }

    /// Evaluates up to `LANES` packed points into `out`. Returns false if a
    /// pre-activation was not finite; `out` is then unspecified.
    pub(crate) fn block(&self, xs: &[f64], buf: &mut [f64], out: &mut [f64]) -> bool {
        let d = self.input_dim;
        let used = out.len();
        for lane in 0..LANES {
            let src = lane.min(used - 1);
            for i in 0..d {
                buf[i * LANES + lane] = xs[src * d + i];
            }
        }
        let mut check = [0.0f64; LANES];
        for (k, &b) in self.bias.iter().enumerate() {
            let mut acc = [b; LANES];
            let (s, e) = (self.starts[k] as usize, self.starts[k + 1] as usize);
            for (&c, &w) in self.cols[s..e].iter().zip(&self.vals[s..e]) {
                let src: &[f64; LANES] = buf[c as usize * LANES..][..LANES].try_into().unwrap();
                for lane in 0..LANES {
                    acc[lane] += w * src[lane];
                }
            }
            let dst = &mut buf[(d + k) * LANES..][..LANES];
            for lane in 0..LANES {
                check[lane] += acc[lane] * 0.0;
                dst[lane] = if acc[lane] > 0.0 { acc[lane] } else { 0.0 };
            }
        }
        let mut acc = [self.out_bias; LANES];
        for (&c, &w) in self.out_cols.iter().zip(&self.out_vals) {
            for lane in 0..LANES {
                acc[lane] += w * buf[c as usize * LANES + lane];
            }
        }
        for lane in 0..LANES {
            check[lane] += acc[lane] * 0.0;
        }
        out.copy_from_slice(&acc[..used]);
        check.iter().all(|c| *c == 0.0)
    }
}
