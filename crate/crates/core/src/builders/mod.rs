//! Constructors that assemble gadgets and expansions into networks with
//! known size and error bounds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::net3d::{Net3D, SizeMetrics};

pub mod formulas;
pub mod hermite;
pub mod poly;
pub mod spec;
pub mod trig;

pub use formulas::{baseline_size, expected_bound, expected_size, BaselineSize};
pub use hermite::{
    build_clipped_hermite, build_hermite_gauss, choose_hermite_params, hermite_proof_chain, HermiteParams,
    HermiteProofChain,
};
pub use poly::{build_analytic_cube, build_analytic_ellipse, build_poly1d, build_poly_nd, build_smooth1d};
pub use spec::{build, BuildDoc, BuildParams, BUILD_IDS};
pub use trig::{build_lp, build_trig, lp_bound_terms, target_lp_norm, LpBoundTerms, TrigKind};

/// Default width cap for multivariate builds.
pub const DEFAULT_WIDTH_CAP: usize = 200_000;

/// Parameters echoed into every report. Unused ones stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Frequency of a single trigonometric net.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BuildReport {
    #[serde(skip)]
    pub net: Net3D,
    pub metrics: SizeMetrics,
    /// Size implied by this construction; depth and height match the net
    /// exactly and width is an upper bound.
    pub expected_metrics: SizeMetrics,
    /// Size given by the closed-form statement, where one exists.
    pub stated_metrics: Option<SizeMetrics>,
    pub theoretical_bound: f64,
    pub bound_formula_id: String,
    pub inputs: BuildInputs,
    /// Intermediate quantities (chosen heights, coefficient maxima, ...).
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BuildReport {
    pub(crate) fn new(net: Net3D, expected: SizeMetrics, bound: f64, formula: &str, inputs: BuildInputs) -> Self {
        BuildReport {
            metrics: net.metrics(),
            net,
            expected_metrics: expected,
            stated_metrics: None,
            theoretical_bound: bound,
            bound_formula_id: formula.to_string(),
            inputs,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn diag(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }

    pub(crate) fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub(crate) fn stated(mut self, m: SizeMetrics) -> Self {
        if m.depth != self.metrics.depth || m.height != self.metrics.height || m.width != self.metrics.width {
            self.notes.push(format!(
                "stated size (W={}, K={}, H={}) differs from built (W={}, K={}, H={})",
                m.width, m.depth, m.height, self.metrics.width, self.metrics.depth, self.metrics.height
            ));
        }
        self.stated_metrics = Some(m);
        self
    }

    /// Depth and height match exactly, width within the expectation.
    pub fn size_consistent(&self) -> bool {
        self.metrics.depth == self.expected_metrics.depth
            && self.metrics.height == self.expected_metrics.height
            && self.metrics.width <= self.expected_metrics.width
    }
}

/// Size triple with unknown counts left at zero.
pub(crate) fn size(width: usize, depth: usize, height: usize) -> SizeMetrics {
    SizeMetrics { width, depth, height, neuron_count: 0, param_count: 0 }
}

/// Smallest H ≥ 0 with factor·2^{−2(H+1)} ≤ budget.
pub fn min_height(factor: f64, budget: f64) -> usize {
    if factor <= budget {
        return 0;
    }
    let mut h = ((factor / budget).log2() / 2.0 - 1.0).ceil().max(0.0) as usize;
    // guard against rounding in log2
    while h > 0 && factor * 4f64.powi(-(h as i32)) <= budget {
        h -= 1;
    }
    while factor * 4f64.powi(-(h as i32 + 1)) > budget {
        h += 1;
    }
    h
}
