use std::collections::BTreeMap;

use super::{Floor, IntraLink, Layer, Net3D, Neuron, Readout};
use crate::error::{invalid, Error, Result};

/// Substitute `maps[i]` for input i of the affine form (w, b).
fn substitute(w: &[(usize, f64)], b: f64, maps: &[Readout]) -> (Vec<(usize, f64)>, f64) {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    let mut bias = b;
    for &(i, c) in w {
        for &(j, m) in &maps[i].weights {
            *acc.entry(j).or_insert(0.0) += c * m;
        }
        bias += c * maps[i].bias;
    }
    (acc.into_iter().filter(|(_, v)| *v != 0.0).collect(), bias)
}

/// `outer ∘ inner`: the outputs of `inner` become the inputs of `outer`.
pub fn chain(outer: &Net3D, inner: &Net3D) -> Result<Net3D> {
    if outer.input_dim() != inner.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: outer.input_dim(),
            got: inner.output_dim(),
        });
    }
    let maps = inner.readout();
    let (dim, mut layers, _) = inner.clone().into_parts();
    let (_, outer_layers, outer_readout) = outer.clone().into_parts();
    let readout = if outer_layers.is_empty() {
        outer_readout
            .iter()
            .map(|r| {
                let (weights, bias) = substitute(&r.weights, r.bias, maps);
                Readout { weights, bias }
            })
            .collect()
    } else {
        outer_readout
    };
    for (l, mut layer) in outer_layers.into_iter().enumerate() {
        if l == 0 {
            for floor in &mut layer.floors {
                for n in &mut floor.neurons {
                    let (weights, bias) = substitute(&n.weights, n.bias, maps);
                    n.weights = weights;
                    n.bias = bias;
                }
            }
        }
        layers.push(layer);
    }
    Net3D::new(dim, layers, readout)
}

/// Append identity layers σ(v) − σ(−v) until the net has `depth` layers.
fn pad_depth(net: &Net3D, depth: usize) -> Net3D {
    let mut net = net.clone();
    while net.layers().len() < depth {
        let mut neurons = Vec::new();
        let mut readout = Vec::new();
        for (o, r) in net.readout().iter().enumerate() {
            let neg = r.weights.iter().map(|&(j, w)| (j, -w)).collect();
            neurons.push(Neuron { weights: r.weights.clone(), bias: r.bias, intra: vec![] });
            neurons.push(Neuron { weights: neg, bias: -r.bias, intra: vec![] });
            readout.push(Readout { weights: vec![(2 * o, 1.0), (2 * o + 1, -1.0)], bias: 0.0 });
        }
        let (dim, mut layers, _) = net.into_parts();
        layers.push(Layer { floors: vec![Floor { neurons }] });
        net = Net3D::new(dim, layers, readout).expect("padding keeps validity");
    }
    net
}

/// Merge nets side by side. `input_map[k][i]` is the global input index
/// read by input i of net k.
fn merge(nets: &[Net3D], input_dim: usize, input_map: &[Vec<usize>]) -> Result<Net3D> {
    if nets.is_empty() {
        return Err(invalid("no networks to merge"));
    }
    let depth = nets.iter().map(|n| n.layers().len()).max().unwrap();
    let nets: Vec<Net3D> = nets.iter().map(|n| pad_depth(n, depth)).collect();
    // remap[k] maps a flat index of net k's previous layer to the merged one
    let mut remap: Vec<Vec<usize>> = input_map.to_vec();
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let nfloors = nets.iter().map(|n| n.layers()[l].floors.len()).max().unwrap();
        let mut floors: Vec<Vec<Neuron>> = vec![vec![]; nfloors];
        let mut next: Vec<Vec<usize>> = Vec::with_capacity(nets.len());
        // base[k][f]: position of net k's floor f inside merged floor f
        let mut base = vec![vec![0usize; nfloors]; nets.len()];
        for f in 0..nfloors {
            let mut acc = 0;
            for (k, n) in nets.iter().enumerate() {
                base[k][f] = acc;
                acc += n.layers()[l].floors.get(f).map_or(0, |fl| fl.neurons.len());
            }
        }
        let mut merged_offs = vec![0usize; nfloors];
        for f in 1..nfloors {
            let prev_len: usize = nets
                .iter()
                .map(|n| n.layers()[l].floors.get(f - 1).map_or(0, |fl| fl.neurons.len()))
                .sum();
            merged_offs[f] = merged_offs[f - 1] + prev_len;
        }
        for (k, n) in nets.iter().enumerate() {
            let mut flat = Vec::new();
            for (f, floor) in n.layers()[l].floors.iter().enumerate() {
                for (i, neuron) in floor.neurons.iter().enumerate() {
                    let mut weights: Vec<(usize, f64)> =
                        neuron.weights.iter().map(|&(j, w)| (remap[k][j], w)).collect();
                    weights.sort_by_key(|t| t.0);
                    let intra = neuron
                        .intra
                        .iter()
                        .map(|link| IntraLink {
                            floor: link.floor,
                            index: base[k][link.floor] + link.index,
                            coeff: link.coeff,
                        })
                        .collect();
                    floors[f].push(Neuron { weights, bias: neuron.bias, intra });
                    flat.push(merged_offs[f] + base[k][f] + i);
                }
            }
            next.push(flat);
        }
        layers.push(Layer { floors: floors.into_iter().map(|neurons| Floor { neurons }).collect() });
        remap = next;
    }
    let mut readout = Vec::new();
    for (k, n) in nets.iter().enumerate() {
        for r in n.readout() {
            let mut weights: Vec<(usize, f64)> =
                r.weights.iter().map(|&(j, w)| (remap[k][j], w)).collect();
            weights.sort_by_key(|t| t.0);
            readout.push(Readout { weights, bias: r.bias });
        }
    }
    Net3D::new(input_dim, layers, readout)
}

/// Nets on disjoint input blocks; inputs and outputs are concatenated.
pub fn parallel(nets: &[Net3D]) -> Result<Net3D> {
    let mut map = Vec::new();
    let mut dim = 0;
    for n in nets {
        map.push((dim..dim + n.input_dim()).collect());
        dim += n.input_dim();
    }
    merge(nets, dim, &map)
}

/// Nets reading the same input vector; outputs are concatenated.
pub fn parallel_shared(nets: &[Net3D]) -> Result<Net3D> {
    let dim = nets.first().ok_or_else(|| invalid("no networks to merge"))?.input_dim();
    if let Some(n) = nets.iter().find(|n| n.input_dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: n.input_dim() });
    }
    let map: Vec<Vec<usize>> = nets.iter().map(|_| (0..dim).collect()).collect();
    merge(nets, dim, &map)
}

/// Σ c_k net_k(x) + bias over scalar nets sharing their input.
pub fn linear_combine(nets: &[Net3D], coeffs: &[f64], bias: f64) -> Result<Net3D> {
    if nets.len() != coeffs.len() {
        return Err(Error::DimensionMismatch { expected: nets.len(), got: coeffs.len() });
    }
    if let Some(n) = nets.iter().find(|n| n.output_dim() != 1) {
        return Err(Error::DimensionMismatch { expected: 1, got: n.output_dim() });
    }
    let sum = Readout { weights: coeffs.iter().copied().enumerate().collect(), bias };
    combine_outputs(&parallel_shared(nets)?, &[sum])
}

/// Replace the outputs by affine combinations of the current outputs.
pub(crate) fn combine_outputs(net: &Net3D, combos: &[Readout]) -> Result<Net3D> {
    let affine = Net3D::new(net.output_dim(), vec![], combos.to_vec())?;
    chain(&affine, net)
}
