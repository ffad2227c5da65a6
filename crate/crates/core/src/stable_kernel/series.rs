//! Convergent origin series and divergent tail series of the radial profile.

use crate::special::ln_gamma;
use std::f64::consts::PI;

/// Value and first two radial derivatives with an absolute error estimate on the value.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Eval3 {
    pub p: f64,
    pub dp: f64,
    pub d2p: f64,
    pub err: f64,
}

/// Coefficients a_k of P(r) = sum_k a_k r^{2k}, alpha > 1 (alpha = 1 converges for r < 1).
#[derive(Debug, Clone)]
pub(crate) struct OriginSeries {
    coeffs: Vec<f64>,
    /// relative rounding error carried by each coefficient
    coeff_eps: Vec<f64>,
}

impl OriginSeries {
    pub fn new(alpha: f64, dim: usize) -> Self {
        let d = dim as f64;
        let ln_pref = (1.0 - d) * 2f64.ln() - alpha.ln() - 0.5 * d * PI.ln();
        let mut coeffs = Vec::new();
        let mut coeff_eps = Vec::new();
        for k in 0..400 {
            let kf = k as f64;
            let lg = ln_gamma((2.0 * kf + d) / alpha) - ln_gamma(kf + 1.0) - ln_gamma(kf + 0.5 * d);
            let ln_a = ln_pref + lg - 2.0 * kf * 2f64.ln();
            if ln_a < -740.0 && k > 4 {
                break;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            coeffs.push(sign * ln_a.exp());
            let scale = ln_gamma((2.0 * kf + d) / alpha).abs() + ln_gamma(kf + 1.0).abs() + 1.0;
            coeff_eps.push(2e-16 * scale);
        }
        OriginSeries { coeffs, coeff_eps }
    }

    /// Sums the series at r; the error estimate combines truncation with rounding cancellation.
    pub fn eval(&self, r: f64, tol: f64) -> Option<Eval3> {
        if r == 0.0 {
            let a0 = self.coeffs[0];
            let a1 = self.coeffs.get(1).copied().unwrap_or(0.0);
            return Some(Eval3 { p: a0, dp: 0.0, d2p: 2.0 * a1, err: a0.abs() * self.coeff_eps[0] });
        }
        let r2 = r * r;
        let (mut p, mut dp, mut d2p) = (0.0f64, 0.0, 0.0);
        let mut abs_sum = 0.0;
        let mut pow = 1.0; // r^{2k}
        let mut prev_term = f64::INFINITY;
        let mut tail_err = f64::INFINITY;
        for (k, (&a, &eps)) in self.coeffs.iter().zip(&self.coeff_eps).enumerate() {
            let term = a * pow;
            let kf = k as f64;
            p += term;
            if k >= 1 {
                dp += 2.0 * kf * term / r;
                d2p += 2.0 * kf * (2.0 * kf - 1.0) * term / r2;
            }
            abs_sum += term.abs() * (eps + 4e-16 * (1.0 + kf).ln().max(1.0));
            let small = term.abs() <= 1e-3 * tol * p.abs().max(1e-300);
            if k > 2 && small && term.abs() <= prev_term {
                tail_err = term.abs();
                break;
            }
            prev_term = term.abs();
            pow *= r2;
            if !pow.is_finite() {
                return None;
            }
        }
        if !tail_err.is_finite() || !p.is_finite() {
            return None;
        }
        Some(Eval3 { p, dp, d2p, err: tail_err + abs_sum })
    }
}

/// Terms b_k r^{-(alpha k + d)} of the asymptotic expansion at infinity.
#[derive(Debug, Clone)]
pub(crate) struct TailSeries {
    alpha: f64,
    dim: f64,
    /// signed coefficients b_k, k = 1..
    pub coeffs: Vec<f64>,
    /// magnitudes without the sine factor, used for truncation
    pub envelope: Vec<f64>,
}

impl TailSeries {
    pub fn new(alpha: f64, dim: usize) -> Self {
        let d = dim as f64;
        let ln_b = -(0.5 * d + 1.0) * PI.ln();
        let mut coeffs = Vec::new();
        let mut envelope = Vec::new();
        for k in 1..120 {
            let kf = k as f64;
            let ak = alpha * kf;
            let ln_mag = ln_b - ln_gamma(kf + 1.0) + ak * 2f64.ln() + ln_gamma(0.5 * (ak + d)) + ln_gamma(0.5 * ak + 1.0);
            if ln_mag > 700.0 {
                break;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let s = (0.5 * PI * ak).sin();
            let mag = ln_mag.exp();
            coeffs.push(sign * mag * s);
            envelope.push(mag);
        }
        TailSeries { alpha, dim: d, coeffs, envelope }
    }

    /// Optimally truncated sum; `None` when the first neglected term exceeds `tol * |value|`.
    pub fn eval(&self, r: f64, tol: f64) -> Option<Eval3> {
        let lr = r.ln();
        let (mut p, mut dp, mut d2p) = (0.0f64, 0.0, 0.0);
        let mut best_env = f64::INFINITY;
        let mut err = f64::INFINITY;
        for (k, (&b, &env)) in self.coeffs.iter().zip(&self.envelope).enumerate() {
            let e = self.alpha * (k as f64 + 1.0) + self.dim;
            let pw = (-e * lr).exp();
            let env_term = env * pw;
            if env_term > best_env {
                break;
            }
            if k > 0 {
                // first neglected term bounds the error if we stop before term k
                err = env_term;
                if env_term <= 1e-3 * tol * p.abs() {
                    break;
                }
            }
            best_env = env_term;
            let term = b * pw;
            p += term;
            dp -= e * term / r;
            d2p += e * (e + 1.0) * term / (r * r);
        }
        if !(err <= tol * p.abs()) || p <= 0.0 {
            return None;
        }
        Some(Eval3 { p, dp, d2p, err: err + 1e-15 * p.abs() })
    }
}
