//! Size comparison against the classical height-one constructions.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::sweep::{measure, MeasureOpts};
use crate::builders::{baseline_size, build, BuildDoc, BuildParams};
use crate::error::{invalid, Result};
use crate::expansions::target::{CatalogFn, Domain, TargetSpec};

/// One build of a row, with the N that the baseline formula is evaluated at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Point {
    #[serde(rename = "N")]
    pub n: usize,
    pub doc: BuildDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Config {
    /// Baseline row name: poly, smooth, analytic-cube, ellipse or hermite.
    pub row: String,
    pub points: Vec<Table1Point>,
    #[serde(default)]
    pub measure: MeasureOpts,
}

/// Polynomial row (Σ 2^{-k} x^k of degree N at H = 10) and analytic-cube
/// row (geometric-product target, δ = 1/2, d = 1) for N = 4..10.
pub fn default_table1_configs() -> Result<Vec<Table1Config>> {
    let ns = 4..=10usize;
    let poly = ns
        .clone()
        .map(|n| {
            let coeffs = (0..=n).map(|k| 0.5f64.powi(k as i32)).collect();
            let params = BuildParams { coeffs: Some(coeffs), h: Some(10), ..Default::default() };
            Table1Point { n, doc: BuildDoc::new("poly", None, params) }
        })
        .collect();
    let target = TargetSpec::catalog(CatalogFn::GeometricProduct, 1, Domain::UnitCube)?;
    let cube = ns
        .map(|n| {
            let params = BuildParams { n: Some(n), delta: Some(0.5), ..Default::default() };
            Table1Point { n, doc: BuildDoc::new("analytic-cube", Some(target.clone()), params) }
        })
        .collect();
    Ok(vec![
        Table1Config { row: "poly".into(), points: poly, measure: MeasureOpts::default() },
        Table1Config { row: "analytic-cube".into(), points: cube, measure: MeasureOpts::default() },
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Row {
    pub row: String,
    pub theorem_id: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub measured: f64,
    pub bound: f64,
    pub width: usize,
    pub depth: usize,
    pub height: usize,
    pub param_count: usize,
    pub flat_width: usize,
    pub flat_depth: usize,
    pub flat_param_count: usize,
    pub baseline_width: Option<f64>,
    pub baseline_depth: f64,
    pub baseline_height: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Report {
    pub rows: Vec<Table1Row>,
}

pub fn table1_report(configs: &[Table1Config]) -> Result<Table1Report> {
    let mut rows = Vec::new();
    for cfg in configs {
        for pt in &cfg.points {
            let doc = &pt.doc;
            let report = build(doc)?;
            let err = measure(doc, &report, &cfg.measure)?;
            let flat = report.net.flatten_to_2d().metrics();
            let base = baseline_size(&cfg.row, pt.n, doc.dim())?;
            rows.push(Table1Row {
                row: cfg.row.clone(),
                theorem_id: doc.theorem_id.clone(),
                n: pt.n,
                measured: err.measured,
                bound: err.bound,
                width: report.metrics.width,
                depth: report.metrics.depth,
                height: report.metrics.height,
                param_count: report.metrics.param_count,
                flat_width: flat.width,
                flat_depth: flat.depth,
                flat_param_count: flat.param_count,
                baseline_width: base.width,
                baseline_depth: base.depth,
                baseline_height: base.height,
            });
        }
    }
    if rows.is_empty() {
        return Err(invalid("Table 1 report needs at least one configuration value"));
    }
    Ok(Table1Report { rows })
}

impl Table1Report {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "row",
            "theorem_id",
            "N",
            "measured",
            "bound",
            "width",
            "depth",
            "height",
            "param_count",
            "flat_width",
            "flat_depth",
            "flat_param_count",
            "baseline_width",
            "baseline_depth",
            "baseline_height",
        ])?;
        for r in &self.rows {
            out.write_record([
                r.row.clone(),
                r.theorem_id.clone(),
                r.n.to_string(),
                format!("{:e}", r.measured),
                format!("{:e}", r.bound),
                r.width.to_string(),
                r.depth.to_string(),
                r.height.to_string(),
                r.param_count.to_string(),
                r.flat_width.to_string(),
                r.flat_depth.to_string(),
                r.flat_param_count.to_string(),
                r.baseline_width.map_or_else(String::new, |w| w.to_string()),
                r.baseline_depth.to_string(),
                r.baseline_height.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_row_flattens_to_width_times_height() {
        let mut cfgs = default_table1_configs().unwrap();
        cfgs.truncate(1);
        cfgs[0].points.truncate(2);
        let rep = table1_report(&cfgs).unwrap();
        for r in &rep.rows {
            assert_eq!(r.flat_width, r.width * r.height);
            assert_eq!(r.depth, r.n - 1);
            assert_eq!(r.baseline_depth, r.n as f64);
            assert_eq!(r.baseline_height, 1);
            assert!(r.measured <= r.bound);
        }
        assert_eq!(rep.to_csv().lines().count(), 3);
    }

    #[test]
    fn config_round_trips() {
        let cfgs = default_table1_configs().unwrap();
        let s = serde_json::to_string(&cfgs).unwrap();
        assert_eq!(serde_json::from_str::<Vec<Table1Config>>(&s).unwrap(), cfgs);
    }
}
