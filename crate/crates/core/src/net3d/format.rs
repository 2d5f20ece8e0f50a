//! JSON network documents (schema `relu3d/v1`).
//!
//! Floats are written in shortest round-trip form, so a document read back
//! evaluates bit-identically.

use serde::{Deserialize, Serialize};

use super::{Floor, IntraLink, Layer, Net3D, Neuron, Readout};
use crate::error::{Error, Result};

pub const SCHEMA: &str = "relu3d/v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetDoc {
    schema: String,
    input_dim: usize,
    layers: Vec<LayerDoc>,
    readout: ReadoutsDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    floors: Vec<FloorDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FloorDoc {
    neurons: Vec<NeuronDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NeuronDoc {
    w: WeightsDoc,
    b: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    intra: Vec<IntraDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntraDoc {
    floor: usize,
    index: usize,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightsDoc {
    Dense(Vec<f64>),
    Sparse(Vec<(usize, f64)>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReadoutDoc {
    w: WeightsDoc,
    b: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ReadoutsDoc {
    One(ReadoutDoc),
    Many(Vec<ReadoutDoc>),
}

fn encode(w: &[(usize, f64)], len: usize) -> WeightsDoc {
    if !w.is_empty() && w.len() == len {
        WeightsDoc::Dense(w.iter().map(|t| t.1).collect())
    } else {
        WeightsDoc::Sparse(w.to_vec())
    }
}

fn decode(w: WeightsDoc, len: usize, path: &str) -> Result<Vec<(usize, f64)>> {
    match w {
        WeightsDoc::Dense(v) if v.is_empty() => Ok(vec![]),
        WeightsDoc::Dense(v) => {
            if v.len() != len {
                return Err(Error::InvalidNetwork {
                    path: path.to_string(),
                    reason: format!("dense weights have length {}, expected {len}", v.len()),
                });
            }
            Ok(v.into_iter().enumerate().filter(|(_, x)| *x != 0.0).collect())
        }
        WeightsDoc::Sparse(v) => Ok(v.into_iter().filter(|(_, x)| *x != 0.0).collect()),
    }
}

fn to_doc(net: &Net3D) -> NetDoc {
    let mut prev = net.input_dim();
    let layers = net
        .layers()
        .iter()
        .map(|layer| {
            let doc = LayerDoc {
                floors: layer
                    .floors
                    .iter()
                    .map(|f| FloorDoc {
                        neurons: f
                            .neurons
                            .iter()
                            .map(|n| NeuronDoc {
                                w: encode(&n.weights, prev),
                                b: n.bias,
                                intra: n
                                    .intra
                                    .iter()
                                    .map(|l| IntraDoc { floor: l.floor, index: l.index, coeff: l.coeff })
                                    .collect(),
                            })
                            .collect(),
                    })
                    .collect(),
            };
            prev = layer.len();
            doc
        })
        .collect();
    let mut outs: Vec<ReadoutDoc> = net
        .readout()
        .iter()
        .map(|r| ReadoutDoc { w: encode(&r.weights, prev), b: r.bias })
        .collect();
    let readout = if outs.len() == 1 {
        ReadoutsDoc::One(outs.pop().unwrap())
    } else {
        ReadoutsDoc::Many(outs)
    };
    NetDoc { schema: SCHEMA.to_string(), input_dim: net.input_dim(), layers, readout }
}

fn from_doc(doc: NetDoc) -> Result<Net3D> {
    if doc.schema != SCHEMA {
        return Err(Error::Parse {
            path: "schema".into(),
            message: format!("unsupported schema {:?}, expected {SCHEMA:?}", doc.schema),
        });
    }
    let mut prev = doc.input_dim;
    let mut layers = Vec::with_capacity(doc.layers.len());
    for (l, ld) in doc.layers.into_iter().enumerate() {
        let mut floors = Vec::with_capacity(ld.floors.len());
        let mut count = 0;
        for (f, fd) in ld.floors.into_iter().enumerate() {
            let mut neurons = Vec::with_capacity(fd.neurons.len());
            for (i, nd) in fd.neurons.into_iter().enumerate() {
                let path = format!("layers[{l}].floors[{f}].neurons[{i}].w");
                neurons.push(Neuron {
                    weights: decode(nd.w, prev, &path)?,
                    bias: nd.b,
                    intra: nd
                        .intra
                        .into_iter()
                        .map(|d| IntraLink { floor: d.floor, index: d.index, coeff: d.coeff })
                        .collect(),
                });
            }
            count += neurons.len();
            floors.push(Floor { neurons });
        }
        prev = count;
        layers.push(Layer { floors });
    }
    let outs = match doc.readout {
        ReadoutsDoc::One(r) => vec![r],
        ReadoutsDoc::Many(v) => v,
    };
    let readout = outs
        .into_iter()
        .enumerate()
        .map(|(o, r)| {
            Ok(Readout { weights: decode(r.w, prev, &format!("readout[{o}].w"))?, bias: r.b })
        })
        .collect::<Result<Vec<_>>>()?;
    Net3D::new(doc.input_dim, layers, readout)
}

pub fn to_json(net: &Net3D) -> String {
    serde_json::to_string(&to_doc(net)).expect("network documents always serialize")
}

pub fn to_json_pretty(net: &Net3D) -> String {
    serde_json::to_string_pretty(&to_doc(net)).expect("network documents always serialize")
}

pub fn from_json(text: &str) -> Result<Net3D> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: NetDoc = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    from_doc(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{sawtooth_net, square_net};

    #[test]
    fn round_trip_is_bit_exact() {
        let g3 = sawtooth_net(3).unwrap();
        let back = from_json(&to_json(&g3)).unwrap();
        assert_eq!(back, g3);
        for i in 0..1000 {
            let x = i as f64 / 999.0;
            assert_eq!(back.evaluate(&[x]).unwrap().to_bits(), g3.evaluate(&[x]).unwrap().to_bits());
        }
        let f = square_net(5).unwrap();
        assert_eq!(from_json(&to_json_pretty(&f)).unwrap(), f);
    }

    #[test]
    fn forward_intra_link_rejected() {
        let doc = r#"{"schema":"relu3d/v1","input_dim":1,"layers":[{"floors":[
            {"neurons":[{"w":[1.0],"b":0.0,"intra":[{"floor":1,"index":0,"coeff":1.0}]}]},
            {"neurons":[{"w":[1.0],"b":0.0}]}]}],"readout":{"w":[1.0,1.0],"b":0.0}}"#;
        match from_json(doc) {
            Err(Error::InvalidNetwork { path, .. }) => {
                assert_eq!(path, "layers[0].floors[0].neurons[0].intra[0]")
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn wrong_weight_length_rejected() {
        let doc = r#"{"schema":"relu3d/v1","input_dim":2,"layers":[{"floors":[
            {"neurons":[{"w":[1.0],"b":0.0}]}]}],"readout":{"w":[1.0],"b":0.0}}"#;
        match from_json(doc) {
            Err(Error::InvalidNetwork { path, .. }) => {
                assert_eq!(path, "layers[0].floors[0].neurons[0].w")
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn malformed_document_names_path() {
        let doc = r#"{"schema":"relu3d/v1","input_dim":1,"layers":[{"floors":[
            {"neurons":[{"w":[1.0],"b":"x"}]}]}],"readout":{"w":[1.0],"b":0.0}}"#;
        match from_json(doc) {
            Err(Error::Parse { path, .. }) => assert!(path.starts_with("layers[0].floors[0]"), "{path}"),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            from_json(r#"{"schema":"other","input_dim":1,"layers":[],"readout":{"w":[1.0],"b":0.0}}"#),
            Err(Error::Parse { .. })
        ));
    }
}
