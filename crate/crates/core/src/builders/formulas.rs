//! Closed-form sizes and bounds of the constructions, and the size formulas
//! of the classical 2D baselines they are compared against.

use serde::Serialize;

use super::hermite::{hermite_stated_height, hermite_stated_width};
use super::poly::poly_nd_stated_width;
use super::trig::trig_stated_height;
use super::{min_height, size, BuildInputs};
use crate::blocks::ceil_log2;
use crate::error::{invalid, Result};
use crate::net3d::SizeMetrics;

pub const THEOREM_IDS: [&str; 8] = ["poly", "polyNd", "smooth", "analytic-cube", "ellipse", "hermite", "trig", "lp"];

fn need<T: Copy>(v: Option<T>, name: &str, id: &str) -> Result<T> {
    v.ok_or_else(|| invalid(format!("{id} needs parameter {name}")))
}

fn check_id(id: &str) -> Result<()> {
    if THEOREM_IDS.contains(&id) {
        Ok(())
    } else {
        Err(invalid(format!("unknown theorem id {id:?}; expected one of {}", THEOREM_IDS.join(", "))))
    }
}

fn rate_b(p: &BuildInputs, id: &str) -> Result<f64> {
    let beta = p.beta.as_ref().ok_or_else(|| invalid(format!("{id} needs parameter beta")))?;
    if beta.is_empty() {
        return Err(invalid("beta must be nonempty"));
    }
    Ok(beta.iter().product::<f64>().powf(1.0 / beta.len() as f64) / 2f64.sqrt())
}

/// Stated (W, K, H) of a construction.
pub fn expected_size(id: &str, p: &BuildInputs) -> Result<SizeMetrics> {
    check_id(id)?;
    let e = std::f64::consts::E;
    Ok(match id {
        "poly" => {
            let n = need(p.n, "N", id)?;
            size(8, n.saturating_sub(1), need(p.h, "H", id)?)
        }
        "polyNd" => {
            let (n, d) = (need(p.n, "N", id)?, need(p.d, "d", id)?);
            size(poly_nd_stated_width(n, d), n.saturating_sub(1), need(p.h, "H", id)?)
        }
        "smooth" => {
            let n = need(p.n, "N", id)?;
            let m = (n + 1) as f64;
            let h = 0.5 * (6f64.log2() * m + 3.0 * (m + 1.0).log2() + 3f64.log2() - 1.0);
            size(8, n, h.ceil() as usize)
        }
        "analytic-cube" => {
            let (n, d, delta) = (need(p.n, "N", id)?, need(p.d, "d", id)?, need(p.delta, "delta", id)?);
            let (nf, df) = (n as f64, d as f64);
            let raw = 0.5
                * (nf.log2() + nf * (1.0 - delta).log2() + df * (nf + df).log2() - df * (df / e).log2()
                    - 6f64.log2()
                    - 2.0);
            // the closed form can go negative; fall back to the bound inequality
            let h = if raw > 0.0 {
                raw.ceil() as usize
            } else {
                min_height(6.0 * nf * (e * (nf + df) / df).powf(df), (1.0 - delta).powf(nf))
            };
            size(poly_nd_stated_width(n, d), n.saturating_sub(1), h)
        }
        "ellipse" => {
            let (n, d, rho) = (need(p.n, "N", id)?, need(p.d, "d", id)?, need(p.rho, "rho", id)?);
            let (nf, df) = (n as f64, d as f64);
            let h = 0.5
                * (df * ((nf + 1.0) * e * (nf + df) / df).log2() + (6.0 * nf).log2() + nf / df.sqrt() * rho.log2()
                    - 2.0);
            size(poly_nd_stated_width(n, d), n.saturating_sub(1), h.ceil().max(0.0) as usize)
        }
        "hermite" => {
            let (n, d) = (need(p.n, "N", id)?, need(p.d, "d", id)?);
            let h = hermite_stated_height(n, d, rate_b(p, id)?);
            size(hermite_stated_width(n, d), n + d - 1, h.ceil().max(0.0) as usize)
        }
        "trig" => {
            let n2 = need(p.n2, "N2", id)?;
            size(8, n2 + 1, trig_stated_height(n2, p.k.unwrap_or(1)))
        }
        _ => {
            let (n1, n2, d) = (need(p.n1, "N1", id)?, need(p.n2, "N2", id)?, need(p.d, "d", id)?);
            size((2 * n1).pow(d as u32) * (4 + d), n2 + d, trig_stated_height(n2, 1).max(ceil_log2(n1)))
        }
    })
}

/// Stated error bound, with unit coefficients for the polynomial gadgets and
/// unit constants where the statement leaves one unspecified.
pub fn expected_bound(id: &str, p: &BuildInputs) -> Result<f64> {
    check_id(id)?;
    let quarter = |h: usize| 4f64.powi(-(h as i32 + 1));
    Ok(match id {
        "poly" => {
            let n = need(p.n, "N", id)? as f64;
            3.0 * n * n * quarter(need(p.h, "H", id)?)
        }
        "polyNd" => {
            let (n, d) = (need(p.n, "N", id)? as f64, need(p.d, "d", id)? as f64);
            6.0 * n * quarter(need(p.h, "H", id)?) * (std::f64::consts::E * (n + d) / d).powf(d)
        }
        "smooth" => 2f64.powi(-(need(p.n, "N", id)? as i32)),
        "analytic-cube" => 2.0 * (1.0 - need(p.delta, "delta", id)?).powi(need(p.n, "N", id)? as i32),
        "ellipse" => {
            let (n, d) = (need(p.n, "N", id)? as f64, need(p.d, "d", id)? as f64);
            need(p.rho, "rho", id)?.powf(-n / d.sqrt())
        }
        "hermite" => (-rate_b(p, id)? * (need(p.n, "N", id)? as f64).sqrt()).exp(),
        "trig" => 2f64.powi(-(need(p.n2, "N2", id)? as i32)),
        _ => return Err(invalid("lp bound depends on the modulus of smoothness of the target; build it to get one")),
    })
}

/// Size of the classical 2D (height 1) construction for a Table 1 row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineSize {
    pub row: String,
    /// `None` where the source gives no width.
    pub width: Option<f64>,
    pub depth: f64,
    pub height: usize,
}

/// Baseline sizes with O(·) constants set to 1.
pub fn baseline_size(row: &str, n: usize, d: usize) -> Result<BaselineSize> {
    let (nf, df) = (n as f64, d as i32);
    let (width, depth) = match row {
        "poly" | "smooth" => (Some(1.0), nf),
        "analytic-cube" => (Some(1.0), nf.powi(2 * df)),
        "ellipse" => (Some(nf.powi(df + 2)), nf * nf),
        "hermite" => (None, nf * nf.log2().powi(2)),
        _ => return Err(invalid(format!("no baseline row for {row:?}"))),
    };
    Ok(BaselineSize { row: row.to_string(), width, depth, height: 1 })
}
