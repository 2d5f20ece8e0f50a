//! Height-augmented ReLU networks.
//!
//! A hidden layer is split into ordered floors. Neurons on a floor receive an
//! affine function of the previous layer's outputs plus weighted links from
//! neurons evaluated earlier in the same layer. The network ends in an affine
//! readout with no activation.

pub(crate) mod assemble;
mod compose;
mod exact;
mod format;
mod packed;

pub use compose::{chain, linear_combine, parallel, parallel_shared};
pub use exact::exact;
pub use format::{from_json, to_json, to_json_pretty, SCHEMA};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use packed::{Packed, LANES};

/// Link from an earlier neuron of the same layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntraLink {
    pub floor: usize,
    pub index: usize,
    pub coeff: f64,
}

/// Sparse weights are kept sorted by index with no duplicates and no zeros.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Neuron {
    pub weights: Vec<(usize, f64)>,
    pub bias: f64,
    pub intra: Vec<IntraLink>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Floor {
    pub neurons: Vec<Neuron>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Layer {
    pub floors: Vec<Floor>,
}

impl Layer {
    pub fn len(&self) -> usize {
        self.floors.iter().map(|f| f.neurons.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One affine output over the last layer (or over the inputs for a net
/// without hidden layers).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Readout {
    pub weights: Vec<(usize, f64)>,
    pub bias: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeMetrics {
    pub width: usize,
    pub depth: usize,
    pub height: usize,
    pub neuron_count: usize,
    pub param_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Net3D {
    input_dim: usize,
    layers: Vec<Layer>,
    readout: Vec<Readout>,
    // flat offset of each floor inside its layer
    offsets: Vec<Vec<usize>>,
    packed: Option<Packed>,
}

#[derive(Default)]
struct Scratch {
    prev: Vec<f64>,
    cur: Vec<f64>,
}

impl Net3D {
    pub fn new(input_dim: usize, layers: Vec<Layer>, readout: Vec<Readout>) -> Result<Self> {
        validate(input_dim, &layers, &readout)?;
        let offsets: Vec<Vec<usize>> = layers
            .iter()
            .map(|l| {
                let mut acc = 0;
                l.floors
                    .iter()
                    .map(|f| {
                        let o = acc;
                        acc += f.neurons.len();
                        o
                    })
                    .collect()
            })
            .collect();
        let packed = Packed::new(input_dim, &layers, &offsets, &readout);
        Ok(Net3D { input_dim, layers, readout, offsets, packed })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.readout.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn readout(&self) -> &[Readout] {
        &self.readout
    }

    /// Number of values feeding the readout.
    pub fn last_len(&self) -> usize {
        self.layers.last().map_or(self.input_dim, Layer::len)
    }

    /// Scalar evaluation; the net must have exactly one output.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if self.readout.len() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.readout.len() });
        }
        let mut s = Scratch::default();
        let mut out = [0.0];
        self.forward(x, &mut s, &mut out)?;
        Ok(out[0])
    }

    pub fn evaluate_all(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut s = Scratch::default();
        let mut out = vec![0.0; self.readout.len()];
        self.forward(x, &mut s, &mut out)?;
        Ok(out)
    }

    pub fn evaluate_batch(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        if let Some(p) = points.iter().find(|p| p.len() != self.input_dim) {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: p.len() });
        }
        let packed: Vec<f64> = points.iter().flatten().copied().collect();
        self.evaluate_packed(&packed)
    }

    /// Batch evaluation over points packed row-major, `input_dim` values each.
    pub fn evaluate_packed(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if self.readout.len() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.readout.len() });
        }
        let d = self.input_dim;
        if xs.len() % d != 0 {
            return Err(Error::DimensionMismatch { expected: d * (xs.len() / d + 1), got: xs.len() });
        }
        let packed = self.packed.as_ref().expect("single-output nets are packed");
        let mut out = vec![0.0; xs.len() / d];
        out.par_chunks_mut(LANES)
            .zip(xs.par_chunks(d * LANES))
            .with_min_len(8)
            .try_for_each_init(
                || (packed.scratch(), Scratch::default()),
                |(buf, s), (o, pts)| {
                    if pts.iter().all(|v| v.is_finite()) && packed.block(pts, buf, o) {
                        return Ok::<(), Error>(());
                    }
                    // redo point by point to locate the failure
                    for (v, p) in o.iter_mut().zip(pts.chunks(d)) {
                        let mut r = [0.0];
                        self.forward(p, s, &mut r)?;
                        *v = r[0];
                    }
                    Ok(())
                },
            )?;
        Ok(out)
    }

    fn forward(&self, x: &[f64], s: &mut Scratch, out: &mut [f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: x.len() });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { location: format!("input[{i}]") });
        }
        s.prev.clear();
        s.prev.extend_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            s.cur.clear();
            let offs = &self.offsets[l];
            for (f, floor) in layer.floors.iter().enumerate() {
                for (i, n) in floor.neurons.iter().enumerate() {
                    let mut z = n.bias;
                    for &(j, w) in &n.weights {
                        z += w * s.prev[j];
                    }
                    for link in &n.intra {
                        z += link.coeff * s.cur[offs[link.floor] + link.index];
                    }
                    if !z.is_finite() {
                        return Err(Error::NonFinite {
                            location: format!("layers[{l}].floors[{f}].neurons[{i}]"),
                        });
                    }
                    s.cur.push(if z > 0.0 { z } else { 0.0 });
                }
            }
            std::mem::swap(&mut s.prev, &mut s.cur);
        }
        for (o, r) in self.readout.iter().enumerate() {
            let mut z = r.bias;
            for &(j, w) in &r.weights {
                z += w * s.prev[j];
            }
            if !z.is_finite() {
                return Err(Error::NonFinite { location: format!("readout[{o}]") });
            }
            out[o] = z;
        }
        Ok(())
    }

    pub fn metrics(&self) -> SizeMetrics {
        let nz = |w: &[(usize, f64)]| w.iter().filter(|(_, v)| *v != 0.0).count();
        let mut m = SizeMetrics {
            width: 0,
            depth: self.layers.len(),
            height: 0,
            neuron_count: 0,
            param_count: 0,
        };
        for layer in &self.layers {
            m.height = m.height.max(layer.floors.len());
            for floor in &layer.floors {
                m.width = m.width.max(floor.neurons.len());
                m.neuron_count += floor.neurons.len();
                for n in &floor.neurons {
                    m.param_count += nz(&n.weights)
                        + usize::from(n.bias != 0.0)
                        + n.intra.iter().filter(|l| l.coeff != 0.0).count();
                }
            }
        }
        for r in &self.readout {
            m.param_count += nz(&r.weights) + usize::from(r.bias != 0.0);
        }
        m
    }

    /// Merge every layer's floors into one floor, keeping evaluation order.
    /// Each flattened layer is padded with inert neurons to exactly W×H.
    pub fn flatten_to_2d(&self) -> Net3D {
        let m = self.metrics();
        let full = m.width * m.height;
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                let offs = &self.offsets[l];
                let neurons = layer
                    .floors
                    .iter()
                    .flat_map(|f| f.neurons.iter())
                    .map(|n| Neuron {
                        weights: n.weights.clone(),
                        bias: n.bias,
                        intra: n
                            .intra
                            .iter()
                            .map(|k| IntraLink {
                                floor: 0,
                                index: offs[k.floor] + k.index,
                                coeff: k.coeff,
                            })
                            .collect(),
                    })
                    .chain(std::iter::repeat_with(|| Neuron { weights: vec![], bias: 0.0, intra: vec![] }))
                    .take(full)
                    .collect();
                Layer { floors: vec![Floor { neurons }] }
            })
            .collect();
        Net3D::new(self.input_dim, layers, self.readout.clone())
            .expect("flattening preserves validity")
    }

    pub(crate) fn into_parts(self) -> (usize, Vec<Layer>, Vec<Readout>) {
        (self.input_dim, self.layers, self.readout)
    }
}

fn check_sparse(w: &[(usize, f64)], len: usize, path: &str) -> Result<()> {
    let bad = |reason: String| Err(Error::InvalidNetwork { path: path.to_string(), reason });
    let mut last = None;
    for (k, &(j, v)) in w.iter().enumerate() {
        if j >= len {
            return bad(format!("entry {k} has index {j}, expected < {len}"));
        }
        if last.is_some_and(|p| j <= p) {
            return bad(format!("entry {k} index {j} not strictly increasing"));
        }
        if !v.is_finite() {
            return bad(format!("entry {k} is not finite"));
        }
        last = Some(j);
    }
    Ok(())
}

fn validate(input_dim: usize, layers: &[Layer], readout: &[Readout]) -> Result<()> {
    let bad = |path: String, reason: &str| {
        Err(Error::InvalidNetwork { path, reason: reason.to_string() })
    };
    if input_dim == 0 {
        return bad("input_dim".into(), "must be positive");
    }
    if readout.is_empty() {
        return bad("readout".into(), "at least one output required");
    }
    let mut prev_len = input_dim;
    for (l, layer) in layers.iter().enumerate() {
        if layer.floors.is_empty() {
            return bad(format!("layers[{l}]"), "layer has no floors");
        }
        for (f, floor) in layer.floors.iter().enumerate() {
            if floor.neurons.is_empty() {
                return bad(format!("layers[{l}].floors[{f}]"), "floor has no neurons");
            }
            for (i, n) in floor.neurons.iter().enumerate() {
                let path = format!("layers[{l}].floors[{f}].neurons[{i}]");
                check_sparse(&n.weights, prev_len, &format!("{path}.w"))?;
                if !n.bias.is_finite() {
                    return bad(format!("{path}.b"), "bias is not finite");
                }
                for (k, link) in n.intra.iter().enumerate() {
                    let lp = format!("{path}.intra[{k}]");
                    if (link.floor, link.index) >= (f, i) {
                        return bad(lp, "source must precede the target in floor order");
                    }
                    if link.index >= layer.floors[link.floor].neurons.len() {
                        return bad(lp, "source neuron does not exist");
                    }
                    if !link.coeff.is_finite() {
                        return bad(lp, "coefficient is not finite");
                    }
                }
            }
        }
        prev_len = layer.len();
    }
    for (o, r) in readout.iter().enumerate() {
        check_sparse(&r.weights, prev_len, &format!("readout[{o}].w"))?;
        if !r.bias.is_finite() {
            return bad(format!("readout[{o}].b"), "bias is not finite");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(w: f64, b: f64) -> Net3D {
        let n = Neuron { weights: vec![(0, w)], bias: b, intra: vec![] };
        Net3D::new(
            1,
            vec![Layer { floors: vec![Floor { neurons: vec![n] }] }],
            vec![Readout { weights: vec![(0, 1.0)], bias: 0.0 }],
        )
        .unwrap()
    }

    #[test]
    fn relu_semantics_single_neuron() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let (w, b, x): (f64, f64, f64) =
                (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let net = single(w, b);
            assert_eq!(net.evaluate(&[x]).unwrap(), (w * x + b).max(0.0));
        }
    }

    #[test]
    fn identity_pair() {
        let p = Neuron { weights: vec![(0, 1.0)], bias: 0.0, intra: vec![] };
        let m = Neuron { weights: vec![(0, -1.0)], bias: 0.0, intra: vec![] };
        let net = Net3D::new(
            1,
            vec![Layer { floors: vec![Floor { neurons: vec![p, m] }] }],
            vec![Readout { weights: vec![(0, 1.0), (1, -1.0)], bias: 0.0 }],
        )
        .unwrap();
        assert_eq!(net.evaluate(&[0.7]).unwrap(), 0.7);
        assert_eq!(net.evaluate(&[-0.7]).unwrap(), -0.7);
    }

    #[test]
    fn rejects_dimension_mismatch_and_nonfinite() {
        let net = single(1.0, 0.0);
        assert!(matches!(net.evaluate(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(net.evaluate(&[f64::NAN]), Err(Error::NonFinite { .. })));
        let big = single(f64::MAX, f64::MAX);
        assert!(matches!(big.evaluate(&[1.0]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn rejects_forward_intra_link() {
        let a = Neuron {
            weights: vec![(0, 1.0)],
            bias: 0.0,
            intra: vec![IntraLink { floor: 1, index: 0, coeff: 1.0 }],
        };
        let b = Neuron { weights: vec![(0, 1.0)], bias: 0.0, intra: vec![] };
        let r = Net3D::new(
            1,
            vec![Layer { floors: vec![Floor { neurons: vec![a] }, Floor { neurons: vec![b] }] }],
            vec![Readout { weights: vec![(0, 1.0)], bias: 0.0 }],
        );
        assert!(matches!(r, Err(Error::InvalidNetwork { .. })));
    }

    #[test]
    fn zero_layer_net_is_affine() {
        let net = Net3D::new(2, vec![], vec![Readout { weights: vec![(0, 2.0), (1, -1.0)], bias: 0.5 }])
            .unwrap();
        assert_eq!(net.evaluate(&[1.0, 3.0]).unwrap(), -0.5);
        assert_eq!(net.metrics().depth, 0);
    }

    #[test]
    fn batch_matches_pointwise() {
        let net = single(2.0, -1.0);
        assert!(net.evaluate_batch(&[]).unwrap().is_empty());
        let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 25.0 - 1.0]).collect();
        let batch = net.evaluate_batch(&pts).unwrap();
        for (p, v) in pts.iter().zip(&batch) {
            assert_eq!(net.evaluate(p).unwrap(), *v);
        }
    }

    #[test]
    fn blocked_evaluation_is_bit_exact() {
        // two floors with an intra link, 19 points so the last block is partial
        let a = Neuron { weights: vec![(0, 0.3), (1, -1.7)], bias: 0.1, intra: vec![] };
        let b = Neuron {
            weights: vec![(1, 2.5)],
            bias: -0.2,
            intra: vec![IntraLink { floor: 0, index: 0, coeff: -0.9 }],
        };
        let net = Net3D::new(
            2,
            vec![Layer { floors: vec![Floor { neurons: vec![a] }, Floor { neurons: vec![b] }] }],
            vec![Readout { weights: vec![(0, 1.1), (1, 0.7)], bias: 0.05 }],
        )
        .unwrap();
        let xs: Vec<f64> = (0..38).map(|i| (i as f64 * 0.37).sin()).collect();
        let vals = net.evaluate_packed(&xs).unwrap();
        assert_eq!(vals.len(), 19);
        for (p, v) in xs.chunks(2).zip(&vals) {
            assert_eq!(net.evaluate(p).unwrap().to_bits(), v.to_bits());
        }
        let mut bad = xs.clone();
        bad[25] = f64::INFINITY;
        assert!(matches!(net.evaluate_packed(&bad), Err(Error::NonFinite { .. })));
        let big = single(f64::MAX, f64::MAX);
        assert!(matches!(big.evaluate_packed(&[0.5, 1.0]), Err(Error::NonFinite { .. })));
    }
}
