//! Parameter sweeps, default measurements per builder and the two-phase
//! fitted-constant check.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norms::{
    default_lp_nodes, default_sup_points, gauss_l2_error, lp_error, sup_error, ErrorReport, NormKind, PASS_SLACK,
};
use crate::builders::{build, BuildDoc, BuildInputs, BuildReport, TrigKind};
use crate::error::{invalid, Result};
use crate::expansions::poly::PolyND;
use crate::expansions::target::{CatalogFn, Domain, TargetSpec};
use crate::net3d::Net3D;

/// Relative increase between consecutive sweep rows tolerated before a row
/// is flagged as non-monotone.
pub const MONOTONE_TOL: f64 = 0.02;

/// Overrides for the default measurement of a build.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureOpts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormKind>,
    /// Grid points or quadrature nodes per dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
}

/// The function a build approximates when the document names none.
pub fn default_target(doc: &BuildDoc, inp: &BuildInputs) -> Result<TargetSpec> {
    if let Some(t) = &doc.target {
        return Ok(t.clone());
    }
    match doc.theorem_id.as_str() {
        "poly" => {
            let c = doc.params.coeffs.as_ref().ok_or_else(|| invalid("poly build without coefficients"))?;
            TargetSpec::polynomial(PolyND::univariate(c)?, Domain::UnitCube)
        }
        "trig" => {
            let freq = inp.k.unwrap_or(1) as f64 * std::f64::consts::PI;
            let f = match doc.params.kind.unwrap_or(TrigKind::Cos) {
                TrigKind::Cos => CatalogFn::Cosine { freq },
                TrigKind::Sin => CatalogFn::Sine { freq },
            };
            TargetSpec::catalog(f, 1, Domain::SymmetricCube { half_width: 1.0 })
        }
        "clipped-hermite" => {
            TargetSpec::catalog(CatalogFn::HermiteBasis { degree: inp.n.unwrap_or(0) }, 1, Domain::GaussianLine)
        }
        other => Err(invalid(format!("{other} build needs an explicit target to measure against"))),
    }
}

/// Per-coordinate interval on which the build's bound is claimed.
pub fn default_bounds(doc: &BuildDoc, inp: &BuildInputs, target: &TargetSpec) -> Result<(f64, f64)> {
    match doc.theorem_id.as_str() {
        "analytic-cube" => Ok((0.0, 1.0 - inp.delta.unwrap_or(0.0))),
        "trig" | "lp" => Ok((-1.0, 1.0)),
        "clipped-hermite" => {
            let (m, dl) = (inp.half_width.unwrap_or(1.0), inp.delta.unwrap_or(0.0));
            Ok((-m + dl, m - dl))
        }
        _ => target.domain.bounds().ok_or_else(|| invalid("target domain is unbounded; give explicit bounds")),
    }
}

pub fn default_norm(doc: &BuildDoc) -> NormKind {
    match doc.theorem_id.as_str() {
        "hermite" => NormKind::GaussL2,
        "lp" => NormKind::Lp { p: doc.params.p.unwrap_or(2.0) },
        _ => NormKind::Sup,
    }
}

/// Measure a build against its bound with the defaults for its theorem.
pub fn measure(doc: &BuildDoc, report: &BuildReport, opts: &MeasureOpts) -> Result<ErrorReport> {
    measure_net(doc, &report.net, &report.inputs, report.theoretical_bound, opts)
}

/// Measure `net`, built from `doc` with echoed `inputs`, against `bound`.
pub fn measure_net(
    doc: &BuildDoc,
    net: &Net3D,
    inputs: &BuildInputs,
    bound: f64,
    opts: &MeasureOpts,
) -> Result<ErrorReport> {
    let target = match &opts.target {
        Some(t) => t.clone(),
        None => default_target(doc, inputs)?,
    };
    let d = target.dimension;
    let bounds = || match opts.bounds {
        Some(b) => Ok(b),
        None => default_bounds(doc, inputs, &target),
    };
    let m = match opts.norm.unwrap_or_else(|| default_norm(doc)) {
        NormKind::Sup => {
            let q = opts.resolution.unwrap_or(default_sup_points(net.metrics().height, d));
            sup_error(net, &target, bounds()?, q)?
        }
        NormKind::Lp { p } => lp_error(net, &target, p, bounds()?, opts.resolution.unwrap_or(default_lp_nodes(d)))?,
        NormKind::GaussL2 => {
            let m = inputs.half_width.ok_or_else(|| invalid("Gaussian L² check needs a support half-width"))?;
            gauss_l2_error(net, &target, m, opts.resolution.unwrap_or(if d == 1 { 4096 } else { 256 }))?
        }
    };
    Ok(m.against(bound))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub measured: f64,
    pub bound: f64,
    pub param_count: usize,
    pub width: usize,
    pub depth: usize,
    pub height: usize,
}

impl SweepRow {
    pub fn ratio(&self) -> f64 {
        if self.bound > 0.0 {
            self.measured / self.bound
        } else if self.measured == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(parameter: &str, mut rows: Vec<SweepRow>) -> Result<SweepTable> {
        if rows.is_empty() {
            return Err(invalid("sweep table needs at least one row"));
        }
        rows.sort_by(|a, b| a.value.total_cmp(&b.value));
        Ok(SweepTable { parameter: parameter.to_string(), rows })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([&self.parameter, "measured", "bound", "ratio", "param_count", "width", "depth", "height"])
?;
        for r in &self.rows {
            out.write_record([
                r.value.to_string(),
                format!("{:e}", r.measured),
                format!("{:e}", r.bound),
                format!("{:e}", r.ratio()),
                r.param_count.to_string(),
                r.width.to_string(),
                r.depth.to_string(),
                r.height.to_string(),
            ])
?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn measured(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.measured).collect()
    }
}

/// Build and measure `base` at every value of `parameter`.
pub fn sweep(base: &BuildDoc, parameter: &str, values: &[f64], opts: &MeasureOpts) -> Result<SweepTable> {
    let rows: Result<Vec<SweepRow>> = values
        .par_iter()
        .map(|&v| {
            let mut doc = base.clone();
            doc.set(parameter, v)?;
            let report = build(&doc)?;
            let err = measure(&doc, &report, opts)?;
            Ok(SweepRow {
                value: v,
                measured: err.measured,
                bound: err.bound,
                param_count: report.metrics.param_count,
                width: report.metrics.width,
                depth: report.metrics.depth,
                height: report.metrics.height,
            })
        })
        .collect();
    SweepTable::new(parameter, rows?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitCheck {
    /// max measured/bound over the fitting rows.
    pub constant: f64,
    pub fit_rows: usize,
    pub checked_rows: usize,
    /// Parameter values in the checking half that exceed constant·bound.
    pub failures: Vec<f64>,
    /// Parameter values whose error rose more than 2% over the previous row.
    pub anomalies: Vec<f64>,
    pub pass: bool,
}

/// Rows whose error rose by more than [`MONOTONE_TOL`] over the previous row.
pub fn monotone_anomalies(table: &SweepTable) -> Vec<f64> {
    table
        .rows
        .windows(2)
        .filter(|w| w[1].measured > w[0].measured * (1.0 + MONOTONE_TOL) + 1e-15)
        .map(|w| w[1].value)
        .collect()
}

/// Two-phase check: the constant is fitted on the first `split` fraction of
/// the rows and the bound constant·bound is asserted on the rest.
pub fn fit_and_check(table: &SweepTable, split: f64) -> Result<FitCheck> {
    let n = table.rows.len();
    if n < 6 {
        return Err(invalid(format!("fitting needs at least 6 sweep points, got {n}")));
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(invalid("split must lie strictly between 0 and 1"));
    }
    let fit_rows = ((n as f64 * split).round() as usize).clamp(1, n - 1);
    let constant = table.rows[..fit_rows].iter().map(SweepRow::ratio).fold(0.0, f64::max);
    if !constant.is_finite() {
        return Err(invalid("a fitting row has a zero bound but nonzero error"));
    }
    let failures: Vec<f64> = table.rows[fit_rows..]
        .iter()
        .filter(|r| !(r.measured <= constant * r.bound * (1.0 + PASS_SLACK)))
        .map(|r| r.value)
        .collect();
    Ok(FitCheck {
        constant,
        fit_rows,
        checked_rows: n - fit_rows,
        pass: failures.is_empty(),
        failures,
        anomalies: monotone_anomalies(table),
    })
}
