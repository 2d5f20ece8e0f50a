//! Build documents: a theorem id, an optional target and parameters,
//! dispatched to the matching builder.

use serde::{Deserialize, Serialize};

use super::{
    build_analytic_cube, build_analytic_ellipse, build_clipped_hermite, build_hermite_gauss, build_lp, build_poly1d,
    build_poly_nd, build_smooth1d, build_trig, BuildReport, TrigKind, DEFAULT_WIDTH_CAP,
};
use crate::error::{invalid, Result};
use crate::expansions::target::{TargetFn, TargetSpec};

pub const BUILD_IDS: [&str; 9] =
    ["poly", "polyNd", "smooth", "analytic-cube", "ellipse", "hermite", "clipped-hermite", "trig", "lp"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildParams {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(rename = "N1", default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(rename = "N2", default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<TrigKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_cap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildDoc {
    pub theorem_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub params: BuildParams,
}

impl BuildDoc {
    pub fn new(theorem_id: &str, target: Option<TargetSpec>, params: BuildParams) -> BuildDoc {
        BuildDoc { theorem_id: theorem_id.to_string(), target, params }
    }

    fn target(&self) -> Result<&TargetSpec> {
        self.target.as_ref().ok_or_else(|| invalid(format!("{} needs a target", self.theorem_id)))
    }

    fn need<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| invalid(format!("{} needs parameter {name}", self.theorem_id)))
    }

    /// Dimension from the parameters or the target, defaulting to 1.
    pub fn dim(&self) -> usize {
        self.params.d.or(self.target.as_ref().map(|t| t.dimension)).unwrap_or(1)
    }

    /// Set a sweepable parameter by name.
    pub fn set(&mut self, name: &str, v: f64) -> Result<()> {
        let as_int = || {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(invalid(format!("parameter {name} must be a nonnegative integer")))
            }
        };
        let p = &mut self.params;
        match name {
            "N" => p.n = Some(as_int()?),
            "H" => p.h = Some(as_int()?),
            "N1" => p.n1 = Some(as_int()?),
            "N2" => p.n2 = Some(as_int()?),
            "r" => p.r = Some(as_int()?),
            "k" => p.k = Some(as_int()?),
            "d" => p.d = Some(as_int()?),
            "delta" => p.delta = Some(v),
            "rho" => p.rho = Some(v),
            "p" => p.p = Some(v),
            "M" => p.half_width = Some(v),
            _ => return Err(invalid(format!("parameter {name} cannot be swept"))),
        }
        Ok(())
    }
}

pub fn build(doc: &BuildDoc) -> Result<BuildReport> {
    let p = &doc.params;
    let cap = p.width_cap.unwrap_or(DEFAULT_WIDTH_CAP);
    match doc.theorem_id.as_str() {
        "poly" => {
            let coeffs = match (&p.coeffs, &doc.target) {
                (Some(c), _) => c.clone(),
                (None, Some(TargetSpec { function: TargetFn::Polynomial(poly), dimension: 1, .. })) => {
                    (0..=poly.degree()).map(|k| poly.coeff(&[k])).collect()
                }
                _ => return Err(invalid("poly needs coeffs or a univariate polynomial target")),
            };
            build_poly1d(&coeffs, doc.need(p.h, "H")?)
        }
        "polyNd" => match &doc.target()?.function {
            TargetFn::Polynomial(poly) => build_poly_nd(poly, doc.need(p.h, "H")?, cap),
            _ => Err(invalid("polyNd needs an explicit-polynomial target")),
        },
        "smooth" => build_smooth1d(doc.target()?, doc.need(p.n, "N")?),
        "analytic-cube" => build_analytic_cube(doc.target()?, doc.need(p.n, "N")?, doc.need(p.delta, "delta")?, doc.dim()),
        "ellipse" => build_analytic_ellipse(doc.target()?, doc.need(p.n, "N")?, doc.need(p.rho, "rho")?, doc.dim()),
        "hermite" => {
            let d = doc.dim();
            let beta = p.beta.clone().unwrap_or_else(|| vec![1.0; d]);
            build_hermite_gauss(doc.target()?, doc.need(p.n, "N")?, d, &beta)
        }
        "clipped-hermite" => build_clipped_hermite(
            doc.need(p.n, "N")?,
            doc.need(p.half_width, "M")?,
            doc.need(p.delta, "delta")?,
            doc.need(p.h, "H")?,
        ),
        "trig" => build_trig(p.k.unwrap_or(1), doc.need(p.n2, "N2")?, p.kind.unwrap_or(TrigKind::Cos)),
        "lp" => build_lp(
            doc.target()?,
            doc.need(p.n1, "N1")?,
            doc.need(p.n2, "N2")?,
            p.r.unwrap_or(2),
            p.p.unwrap_or(2.0),
            cap,
        ),
        other => Err(invalid(format!("unknown theorem id {other:?}; expected one of {}", BUILD_IDS.join(", ")))),
    }
}
