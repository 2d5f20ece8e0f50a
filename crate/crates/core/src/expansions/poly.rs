use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type MultiIndex = Vec<u32>;

/// Sparse polynomial Σ a_j x^j in d variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyDoc", into = "PolyDoc")]
pub struct PolyND {
    d: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

#[derive(Serialize, Deserialize)]
struct PolyDoc {
    d: usize,
    terms: Vec<(MultiIndex, f64)>,
}

impl TryFrom<PolyDoc> for PolyND {
    type Error = crate::Error;
    fn try_from(doc: PolyDoc) -> Result<Self> {
        PolyND::from_terms(doc.d, doc.terms)
    }
}

impl From<PolyND> for PolyDoc {
    fn from(p: PolyND) -> Self {
        PolyDoc { d: p.d, terms: p.coeffs.into_iter().collect() }
    }
}

pub fn total_degree(j: &[u32]) -> u32 {
    j.iter().sum()
}

/// All multi-indices in d variables with |j| = k, in lexicographic order.
pub fn indices_of_degree(d: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    if d == 0 {
        return out;
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// All multi-indices with |j| ≤ n.
pub fn indices_up_to(d: usize, n: u32) -> Vec<MultiIndex> {
    (0..=n).flat_map(|k| indices_of_degree(d, k)).collect()
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl PolyND {
    pub fn new(d: usize) -> PolyND {
        PolyND { d, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, f64)>>(d: usize, terms: I) -> Result<PolyND> {
        if d == 0 {
            return Err(invalid("polynomial dimension must be positive"));
        }
        let mut p = PolyND::new(d);
        for (j, a) in terms {
            if j.len() != d {
                return Err(invalid(format!("multi-index {j:?} has wrong length for d = {d}")));
            }
            if !a.is_finite() {
                return Err(invalid(format!("coefficient of {j:?} is not finite")));
            }
            *p.coeffs.entry(j).or_insert(0.0) += a;
        }
        p.coeffs.retain(|_, a| *a != 0.0);
        Ok(p)
    }

    /// Univariate polynomial from a_0..a_n.
    pub fn univariate(coeffs: &[f64]) -> Result<PolyND> {
        PolyND::from_terms(1, coeffs.iter().enumerate().map(|(k, &a)| (vec![k as u32], a)))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|j| total_degree(j)).max().unwrap_or(0)
    }

    pub fn coeff(&self, j: &[u32]) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(j, a)| (j, *a))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Σ |a_j| over non-constant terms.
    pub fn abs_sum_nonconstant(&self) -> f64 {
        self.terms().filter(|(j, _)| total_degree(j) > 0).map(|(_, a)| a.abs()).sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.terms().map(|(_, a)| a.abs()).sum()
    }

    pub fn max_abs_nonconstant(&self) -> f64 {
        self.terms().filter(|(j, _)| total_degree(j) > 0).map(|(_, a)| a.abs()).fold(0.0, f64::max)
    }

    /// Drop terms of total degree above n.
    pub fn truncate(&self, n: u32) -> PolyND {
        PolyND {
            d: self.d,
            coeffs: self.coeffs.iter().filter(|(j, _)| total_degree(j) <= n).map(|(j, a)| (j.clone(), *a)).collect(),
        }
    }

    /// Drop terms with |a_j| ≤ tol.
    pub fn prune(&self, tol: f64) -> PolyND {
        PolyND {
            d: self.d,
            coeffs: self.coeffs.iter().filter(|(_, a)| a.abs() > tol).map(|(j, a)| (j.clone(), *a)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        let mut s = 0.0;
        for (j, a) in &self.coeffs {
            let mut t = *a;
            for (xi, &e) in x.iter().zip(j) {
                t *= xi.powi(e as i32);
            }
            s += t;
        }
        s
    }
}
