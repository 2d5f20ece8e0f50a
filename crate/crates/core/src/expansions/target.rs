//! Target functions: a built-in catalog of analytically evaluable functions
//! plus explicit coefficient data.

use serde::{Deserialize, Serialize};

use super::hermite::{hermite_eval, hermite_tail_numeric};
use super::poly::{total_degree, PolyND};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    UnitCube,
    ShiftedCube { lo: f64, hi: f64 },
    SymmetricCube { half_width: f64 },
    GaussianLine,
}

impl Domain {
    /// Per-coordinate interval, if bounded.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Domain::UnitCube => Some((0.0, 1.0)),
            Domain::ShiftedCube { lo, hi } => Some((lo, hi)),
            Domain::SymmetricCube { half_width } => Some((-half_width, half_width)),
            Domain::GaussianLine => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "catalog_id", content = "params", rename_all = "kebab-case")]
pub enum CatalogFn {
    /// x_1²
    Square,
    /// x_1
    Identity,
    Constant { value: f64 },
    /// 1/(x_1 + a)
    ReciprocalShift { a: f64 },
    /// exp(Σ x_j − d), series coefficients e^{−d}/j!
    ScaledExponential,
    /// Π 1/(2 − x_j), series coefficients 2^{−d−|j|}
    GeometricProduct,
    /// Π cos(freq·x_j)
    Cosine { freq: f64 },
    /// Π sin(freq·x_j)
    Sine { freq: f64 },
    /// Π Ξ_n(x_j), the normalized Hermite polynomial
    HermiteBasis { degree: usize },
    /// 1/(1 + a|x|²)
    Runge { a: f64 },
    /// Σ |x_j|^alpha
    AbsPower { alpha: f64 },
    /// Σ |x_j|
    AbsSum,
    /// 1 for x_1 ≥ 0, else 0
    Step,
    /// sign(x_1)
    Sign,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TargetFn {
    Polynomial(PolyND),
    PowerSeries(PolyND),
    Catalog(CatalogFn),
    /// Component of `base` that is even in coordinates with η_k = 0 and odd
    /// in coordinates with η_k = 1.
    Parity { base: Box<TargetSpec>, eta: Vec<u8> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TargetDoc", into = "TargetDoc")]
pub struct TargetSpec {
    pub function: TargetFn,
    pub dimension: usize,
    pub domain: Domain,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    catalog_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs: Option<PolyND>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Box<TargetSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<Vec<u8>>,
    dimension: usize,
    #[serde(default = "default_domain")]
    domain: Domain,
}

fn default_domain() -> Domain {
    Domain::UnitCube
}

impl TryFrom<TargetDoc> for TargetSpec {
    type Error = Error;
    fn try_from(doc: TargetDoc) -> Result<Self> {
        let function = match doc.kind.as_str() {
            "explicit-polynomial" | "explicit-power-series" => {
                let c = doc.coeffs.ok_or_else(|| invalid("explicit target needs coeffs"))?;
                if doc.kind == "explicit-polynomial" {
                    TargetFn::Polynomial(c)
                } else {
                    TargetFn::PowerSeries(c)
                }
            }
            "catalog-function" => {
                let id = doc.catalog_id.ok_or_else(|| invalid("catalog target needs catalog_id"))?;
                TargetFn::Catalog(catalog_from(&id, doc.params)?)
            }
            "parity-component" => TargetFn::Parity {
                base: doc.base.ok_or_else(|| invalid("parity component needs base"))?,
                eta: doc.eta.ok_or_else(|| invalid("parity component needs eta"))?,
            },
            other => return Err(invalid(format!("unknown target kind {other:?}"))),
        };
        TargetSpec::new(function, doc.dimension, doc.domain)
    }
}

impl From<TargetSpec> for TargetDoc {
    fn from(t: TargetSpec) -> Self {
        let mut doc = TargetDoc {
            kind: String::new(),
            catalog_id: None,
            params: None,
            coeffs: None,
            base: None,
            eta: None,
            dimension: t.dimension,
            domain: t.domain,
        };
        match t.function {
            TargetFn::Polynomial(p) => {
                doc.kind = "explicit-polynomial".into();
                doc.coeffs = Some(p);
            }
            TargetFn::PowerSeries(p) => {
                doc.kind = "explicit-power-series".into();
                doc.coeffs = Some(p);
            }
            TargetFn::Catalog(c) => {
                doc.kind = "catalog-function".into();
                let v = serde_json::to_value(&c).expect("catalog entries serialize");
                doc.catalog_id = v.get("catalog_id").and_then(|s| s.as_str()).map(String::from);
                doc.params = v.get("params").cloned();
            }
            TargetFn::Parity { base, eta } => {
                doc.kind = "parity-component".into();
                doc.base = Some(base);
                doc.eta = Some(eta);
            }
        }
        doc
    }
}

/// Resolve a catalog id and its parameters.
pub fn catalog_from(id: &str, params: Option<serde_json::Value>) -> Result<CatalogFn> {
    let mut obj = serde_json::Map::new();
    obj.insert("catalog_id".into(), serde_json::Value::String(id.to_string()));
    if let Some(p) = params.filter(|p| !p.is_null()) {
        obj.insert("params".into(), p);
    }
    serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|e| invalid(format!("catalog entry {id:?}: {e}")))
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// P(|X| > r) for X ~ N(0, 1).
pub(crate) fn two_sided_tail(r: f64) -> f64 {
    libm::erfc(r / std::f64::consts::SQRT_2)
}

impl TargetSpec {
    pub fn new(function: TargetFn, dimension: usize, domain: Domain) -> Result<TargetSpec> {
        if dimension == 0 {
            return Err(invalid("target dimension must be positive"));
        }
        match &function {
            TargetFn::Polynomial(p) | TargetFn::PowerSeries(p) if p.dim() != dimension => {
                return Err(invalid("coefficient dimension differs from target dimension"));
            }
            TargetFn::Parity { base, eta } if eta.len() != dimension || base.dimension != dimension => {
                return Err(invalid("parity vector must match the dimension"));
            }
            TargetFn::Catalog(CatalogFn::ReciprocalShift { a }) => {
                if let Some((lo, _)) = domain.bounds() {
                    if lo + a <= 0.0 {
                        return Err(invalid("reciprocal-shift pole lies inside the domain"));
                    }
                }
            }
            _ => {}
        }
        Ok(TargetSpec { function, dimension, domain })
    }

    pub fn catalog(f: CatalogFn, dimension: usize, domain: Domain) -> Result<TargetSpec> {
        TargetSpec::new(TargetFn::Catalog(f), dimension, domain)
    }

    pub fn polynomial(p: PolyND, domain: Domain) -> Result<TargetSpec> {
        let d = p.dim();
        TargetSpec::new(TargetFn::Polynomial(p), d, domain)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.function {
            TargetFn::Polynomial(p) | TargetFn::PowerSeries(p) => p.eval(x),
            TargetFn::Catalog(c) => eval_catalog(c, x),
            TargetFn::Parity { base, eta } => {
                let d = self.dimension;
                let mut y = vec![0.0; d];
                let mut s = 0.0;
                for mask in 0..(1usize << d) {
                    let mut sign = 1.0;
                    for k in 0..d {
                        let flip = mask >> k & 1 == 1;
                        y[k] = if flip { -x[k] } else { x[k] };
                        if flip && eta[k] == 1 {
                            sign = -sign;
                        }
                    }
                    s += sign * base.eval(&y);
                }
                s / (1usize << d) as f64
            }
        }
    }

    /// Coordinates where the target (or a derivative) jumps; the same set
    /// applies to every coordinate.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.function {
            TargetFn::Catalog(CatalogFn::AbsPower { .. } | CatalogFn::AbsSum | CatalogFn::Step | CatalogFn::Sign) => {
                vec![0.0]
            }
            TargetFn::Parity { base, .. } => {
                let mut b = base.breakpoints();
                b.extend(base.breakpoints().iter().map(|t| -t));
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            }
            _ => vec![],
        }
    }

    /// Closed-form power series coefficient a_j, when available.
    pub fn series_coeff(&self, j: &[u32]) -> Option<f64> {
        let d = self.dimension as i32;
        match &self.function {
            TargetFn::PowerSeries(p) | TargetFn::Polynomial(p) => Some(p.coeff(j)),
            TargetFn::Catalog(CatalogFn::GeometricProduct) => Some(0.5f64.powi(d + total_degree(j) as i32)),
            TargetFn::Catalog(CatalogFn::ScaledExponential) => {
                let fact: f64 = j.iter().map(|&k| (1..=k).map(f64::from).product::<f64>()).product();
                Some((-(d as f64)).exp() / fact)
            }
            _ => None,
        }
    }

    /// Σ |a_j| over the full series, when known in closed form.
    pub fn series_abs_sum(&self) -> Option<f64> {
        match &self.function {
            TargetFn::PowerSeries(p) | TargetFn::Polynomial(p) => Some(p.abs_sum()),
            TargetFn::Catalog(CatalogFn::GeometricProduct | CatalogFn::ScaledExponential) => Some(1.0),
            _ => None,
        }
    }

    /// Whether |f^{(n)}| ≤ n! holds on [0,1] for every n (univariate).
    pub fn derivative_bound_holds(&self) -> bool {
        if self.dimension != 1 {
            return false;
        }
        match &self.function {
            TargetFn::Catalog(c) => match c {
                CatalogFn::ReciprocalShift { a } => *a >= 1.0,
                CatalogFn::GeometricProduct | CatalogFn::ScaledExponential | CatalogFn::Identity => true,
                CatalogFn::Constant { value } => value.abs() <= 1.0,
                CatalogFn::Cosine { freq } => freq.abs() <= 1.0,
                _ => false,
            },
            _ => false,
        }
    }

    /// sup |f| over the whole space, for bounded targets.
    pub fn sup_abs(&self) -> Option<f64> {
        match &self.function {
            TargetFn::Catalog(c) => match c {
                CatalogFn::Constant { value } => Some(value.abs()),
                CatalogFn::Cosine { .. }
                | CatalogFn::Sine { .. }
                | CatalogFn::Runge { .. }
                | CatalogFn::Step
                | CatalogFn::Sign => Some(1.0),
                _ => None,
            },
            TargetFn::Parity { base, .. } => base.sup_abs(),
            _ => None,
        }
    }

    /// ∫ |f|² dγ_d over the complement of [−r, r]^d, from closed forms or a
    /// sup-norm envelope. `None` when no tail estimate is available.
    pub fn gaussian_tail(&self, r: f64) -> Option<f64> {
        let d = self.dimension as i32;
        let p_in = 1.0 - two_sided_tail(r);
        let p_out = 1.0 - p_in.powi(d);
        match &self.function {
            TargetFn::Catalog(CatalogFn::Identity) => {
                let second_in = p_in - 2.0 * r * std_normal_pdf(r);
                Some(1.0 - second_in * p_in.powi(d - 1))
            }
            TargetFn::Catalog(CatalogFn::Square) => {
                let fourth_in = 3.0 * p_in - 2.0 * std_normal_pdf(r) * (r.powi(3) + 3.0 * r);
                Some(3.0 - fourth_in * p_in.powi(d - 1))
            }
            TargetFn::Catalog(CatalogFn::HermiteBasis { degree }) => {
                Some(1.0 - (1.0 - hermite_tail_numeric(*degree, r)).powi(d))
            }
            _ => self.sup_abs().map(|s| s * s * p_out),
        }
    }
}

fn eval_catalog(c: &CatalogFn, x: &[f64]) -> f64 {
    match *c {
        CatalogFn::Square => x[0] * x[0],
        CatalogFn::Identity => x[0],
        CatalogFn::Constant { value } => value,
        CatalogFn::ReciprocalShift { a } => 1.0 / (x[0] + a),
        CatalogFn::ScaledExponential => (x.iter().sum::<f64>() - x.len() as f64).exp(),
        CatalogFn::GeometricProduct => x.iter().map(|v| 1.0 / (2.0 - v)).product(),
        CatalogFn::Cosine { freq } => x.iter().map(|v| (freq * v).cos()).product(),
        CatalogFn::Sine { freq } => x.iter().map(|v| (freq * v).sin()).product(),
        CatalogFn::HermiteBasis { degree } => x.iter().map(|&v| hermite_eval(degree, v)).product(),
        CatalogFn::Runge { a } => 1.0 / (1.0 + a * x.iter().map(|v| v * v).sum::<f64>()),
        CatalogFn::AbsPower { alpha } => x.iter().map(|v| v.abs().powf(alpha)).sum(),
        CatalogFn::AbsSum => x.iter().map(|v| v.abs()).sum(),
        CatalogFn::Step => {
            if x[0] >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        CatalogFn::Sign => {
            if x[0] > 0.0 {
                1.0
            } else if x[0] < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_documents_round_trip() {
        let t = TargetSpec::catalog(CatalogFn::ReciprocalShift { a: 2.0 }, 1, Domain::UnitCube).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"catalog_id\":\"reciprocal-shift\""), "{s}");
        assert_eq!(serde_json::from_str::<TargetSpec>(&s).unwrap(), t);
        let sq: TargetSpec =
            serde_json::from_str(r#"{"kind":"catalog-function","catalog_id":"square","dimension":1}"#).unwrap();
        assert_eq!(sq.eval(&[0.5]), 0.25);
        let bad = serde_json::from_str::<TargetSpec>(r#"{"kind":"catalog-function","catalog_id":"nope","dimension":1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn series_coefficients_sum_to_function() {
        let t = TargetSpec::catalog(CatalogFn::GeometricProduct, 1, Domain::UnitCube).unwrap();
        let x: f64 = 0.3;
        let s: f64 = (0..80).map(|k| t.series_coeff(&[k]).unwrap() * x.powi(k as i32)).sum();
        assert!((s - t.eval(&[x])).abs() < 1e-14);
        let e = TargetSpec::catalog(CatalogFn::ScaledExponential, 2, Domain::UnitCube).unwrap();
        let mut s = 0.0;
        for a in 0..30u32 {
            for b in 0..30u32 {
                s += e.series_coeff(&[a, b]).unwrap() * 0.4f64.powi(a as i32) * 0.7f64.powi(b as i32);
            }
        }
        assert!((s - e.eval(&[0.4, 0.7])).abs() < 1e-14);
    }

    #[test]
    fn parity_components_sum_back() {
        let base = TargetSpec::catalog(CatalogFn::Runge { a: 3.0 }, 2, Domain::SymmetricCube { half_width: 1.0 })
            .unwrap();
        let shifted = TargetSpec::polynomial(
            PolyND::from_terms(2, vec![(vec![1, 0], 1.0), (vec![1, 2], 0.5), (vec![0, 1], -2.0)]).unwrap(),
            Domain::SymmetricCube { half_width: 1.0 },
        )
        .unwrap();
        for t in [base, shifted] {
            let comps: Vec<TargetSpec> = (0..4u8)
                .map(|m| {
                    TargetSpec::new(
                        TargetFn::Parity { base: Box::new(t.clone()), eta: vec![m & 1, m >> 1] },
                        2,
                        t.domain,
                    )
                    .unwrap()
                })
                .collect();
            for i in 0..=10 {
                for j in 0..=10 {
                    let x = [-1.0 + 0.2 * i as f64, -1.0 + 0.2 * j as f64];
                    let s: f64 = comps.iter().map(|c| c.eval(&x)).sum();
                    assert!((s - t.eval(&x)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gaussian_tails() {
        let id = TargetSpec::catalog(CatalogFn::Identity, 1, Domain::GaussianLine).unwrap();
        assert!((id.gaussian_tail(0.0).unwrap() - 1.0).abs() < 1e-15);
        let sq = TargetSpec::catalog(CatalogFn::Square, 1, Domain::GaussianLine).unwrap();
        assert!((sq.gaussian_tail(0.0).unwrap() - 3.0).abs() < 1e-15);
        let one = TargetSpec::catalog(CatalogFn::Constant { value: 1.0 }, 1, Domain::GaussianLine).unwrap();
        assert!((one.gaussian_tail(3.0).unwrap() - libm::erfc(3.0 / 2f64.sqrt())).abs() < 1e-16);
        let run = TargetSpec::catalog(CatalogFn::ReciprocalShift { a: 2.0 }, 1, Domain::GaussianLine).unwrap();
        assert!(run.gaussian_tail(3.0).is_none());
    }

    #[test]
    fn pole_inside_domain_rejected() {
        assert!(TargetSpec::catalog(CatalogFn::ReciprocalShift { a: 0.0 }, 1, Domain::UnitCube).is_err());
    }
}
