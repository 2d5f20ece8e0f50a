//! Fejér and generalized Jackson kernels.

use std::f64::consts::PI;

use serde::Serialize;

use super::quadrature::{composite, compensated_sum};
use crate::error::{invalid, Result};

/// Fejér coefficients 1 − |k|/m for k = −(m−1)..=(m−1).
pub fn fejer_coeffs(m: usize) -> Vec<f64> {
    let m = m.max(1) as i64;
    (-(m - 1)..=(m - 1)).map(|k| 1.0 - k.abs() as f64 / m as f64).collect()
}

/// Two-sided discrete convolution.
fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// K_{n,r}(t) = Σ_{k=0}^{n} a_k cos(kt), the normalized r-th power of the
/// Fejér kernel (sin(mt/2)/sin(t/2))² with m = ⌊n/r⌋ + 1.
#[derive(Clone, Debug, Serialize)]
pub struct KernelCoeffs {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    /// Normalized cosine coefficients, k = 0..=n.
    pub a: Vec<f64>,
    /// Unnormalized cosine coefficients ã_k of F_m^r, k = 0..=n.
    pub a_tilde: Vec<f64>,
    pub gamma: f64,
}

pub fn jackson_kernel(n: usize, r: usize) -> Result<KernelCoeffs> {
    if r == 0 || r > n {
        return Err(invalid(format!("Jackson kernel needs n ≥ r ≥ 1, got n = {n}, r = {r}")));
    }
    let m = n / r + 1;
    // (m − |k|) are the exponential coefficients of (sin(mt/2)/sin(t/2))²
    let base: Vec<f64> = fejer_coeffs(m).iter().map(|c| c * m as f64).collect();
    let mut power = base.clone();
    for _ in 1..r {
        power = convolve(&power, &base);
    }
    let mid = power.len() / 2;
    let deg = power.len() - 1 - mid;
    debug_assert!(deg <= n);
    let mut a_tilde = vec![0.0; n + 1];
    a_tilde[0] = power[mid];
    for k in 1..=deg {
        a_tilde[k] = 2.0 * power[mid + k];
    }
    let gamma = 1.0 / (2.0 * PI * a_tilde[0]);
    let a = a_tilde.iter().map(|c| c * gamma).collect();
    Ok(KernelCoeffs { n, r, m, a, a_tilde, gamma })
}

impl KernelCoeffs {
    pub fn eval(&self, t: f64) -> f64 {
        self.a.iter().enumerate().map(|(k, c)| c * (k as f64 * t).cos()).sum()
    }

    /// ∫_{−π}^{π} K, evaluated by quadrature.
    pub fn integral(&self) -> f64 {
        let rule = composite(-PI, PI, &[], 64 * (self.n + 4), 16);
        compensated_sum(rule.iter().map(|&(t, w)| w * self.eval(t)))
    }
}

/// ∫_{−π}^{π} |t|^k K_{n,r}(t) dt. Only k ≤ 2r − 2 is covered by the moment bound.
pub fn kernel_moments(kernel: &KernelCoeffs, k: u32) -> Result<f64> {
    if k as usize + 2 > 2 * kernel.r {
        return Err(invalid(format!("moment order {k} exceeds 2r − 2 = {}", 2 * kernel.r - 2)));
    }
    let rule = composite(-PI, PI, &[0.0], 64 * (kernel.n + 4), 16);
    Ok(compensated_sum(rule.iter().map(|&(t, w)| w * t.abs().powi(k as i32) * kernel.eval(t))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fejer_triangle() {
        let c = fejer_coeffs(3);
        let want = [1.0 / 3.0, 2.0 / 3.0, 1.0, 2.0 / 3.0, 1.0 / 3.0];
        assert_eq!(c.len(), 5);
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn r1_is_normalized_fejer() {
        let k = jackson_kernel(6, 1).unwrap();
        assert_eq!(k.m, 7);
        for i in 0..=20 {
            let t = -3.0 + 0.3 * i as f64 + 0.01;
            let fejer = ((7.0 * t / 2.0).sin() / (t / 2.0).sin()).powi(2);
            assert!((k.eval(t) - k.gamma * fejer).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_positive_and_sums_to_power() {
        let k = jackson_kernel(8, 2).unwrap();
        assert!((k.integral() - 1.0).abs() < 1e-10);
        assert!((2.0 * PI * k.a[0] - 1.0).abs() < 1e-14);
        let m = k.m as f64;
        assert_eq!(k.a_tilde.iter().sum::<f64>(), m.powi(4));
        assert!(k.a_tilde.iter().take(2 * (k.m - 1) + 1).all(|&c| c > 0.0));
        for i in 0..=10_000 {
            let t = -PI + 2.0 * PI * i as f64 / 10_000.0;
            assert!(k.eval(t) >= -1e-12);
        }
    }

    #[test]
    fn moments() {
        let k = jackson_kernel(16, 2).unwrap();
        assert!((kernel_moments(&k, 0).unwrap() - 1.0).abs() < 1e-10);
        assert!(kernel_moments(&k, 3).is_err());
        assert!(jackson_kernel(2, 3).is_err());
        let scaled: Vec<f64> =
            [16, 32, 64].iter().map(|&n| kernel_moments(&jackson_kernel(n, 2).unwrap(), 1).unwrap() * n as f64).collect();
        assert!(scaled.iter().all(|&s| s < 10.0), "{scaled:?}");
    }
}
