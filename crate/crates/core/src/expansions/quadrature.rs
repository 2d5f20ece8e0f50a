//! Quadrature rules and compensated summation.

use gauss_quad::{GaussHermite, GaussLegendre};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = CompensatedSum::default();
    for v in it {
        s.add(v);
    }
    s.value()
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn legendre(order: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(order.max(2)).expect("order ≥ 2").into_node_weight_pairs()
}

/// Gauss–Hermite rule for the standard normal weight: Σ w_i g(x_i) ≈ E[g(X)].
pub fn hermite_probabilists(order: usize) -> Vec<(f64, f64)> {
    let pi_sqrt = std::f64::consts::PI.sqrt();
    let mut rule: Vec<(f64, f64)> = GaussHermite::new(order.max(2))
        .expect("order ≥ 2")
        .into_node_weight_pairs()
        .into_iter()
        .map(|(x, w)| (x * std::f64::consts::SQRT_2, w / pi_sqrt))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Composite Gauss–Legendre rule on [a, b] with panel edges at every
/// breakpoint inside the interval and about `nodes` points in total.
pub fn composite(a: f64, b: f64, breaks: &[f64], nodes: usize, order: usize) -> Vec<(f64, f64)> {
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);
    let panels = (nodes / order).max(edges.len() - 1);
    let rule = legendre(order);
    let len = b - a;
    let mut out = Vec::with_capacity(panels * order + order);
    for win in edges.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let k = (((hi - lo) / len * panels as f64).round() as usize).max(1);
        let h = (hi - lo) / k as f64;
        for p in 0..k {
            let c = lo + (p as f64 + 0.5) * h;
            for &(x, w) in &rule {
                out.push((c + 0.5 * h * x, 0.5 * h * w));
            }
        }
    }
    out
}
