//! Rational forward pass. Every finite double is a dyadic rational, so on
//! dyadic inputs this reproduces the exact real-arithmetic network value.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::Net3D;
use crate::error::{Error, Result};

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("network parameters are finite")
}

impl Net3D {
    pub fn evaluate_exact(&self, x: &[BigRational]) -> Result<Vec<BigRational>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        let mut prev: Vec<BigRational> = x.to_vec();
        for (l, layer) in self.layers().iter().enumerate() {
            let offs = &self.offsets[l];
            let mut cur: Vec<BigRational> = Vec::with_capacity(layer.len());
            for floor in &layer.floors {
                for n in &floor.neurons {
                    let mut z = rat(n.bias);
                    for &(j, w) in &n.weights {
                        z += rat(w) * &prev[j];
                    }
                    for link in &n.intra {
                        z += rat(link.coeff) * &cur[offs[link.floor] + link.index];
                    }
                    cur.push(if z.is_positive() { z } else { BigRational::zero() });
                }
            }
            prev = cur;
        }
        Ok(self
            .readout()
            .iter()
            .map(|r| {
                let mut z = rat(r.bias);
                for &(j, w) in &r.weights {
                    z += rat(w) * &prev[j];
                }
                z
            })
            .collect())
    }
}

/// Exact rational value of a double.
pub fn exact(v: f64) -> BigRational {
    rat(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::square_net;

    #[test]
    fn exact_path_agrees_with_float_on_dyadics() {
        let f = square_net(4).unwrap();
        for l in 0..=64 {
            let x = l as f64 / 64.0;
            let e = f.evaluate_exact(&[rat(x)]).unwrap().pop().unwrap();
            assert_eq!(e, rat(f.evaluate(&[x]).unwrap()));
        }
    }
}
