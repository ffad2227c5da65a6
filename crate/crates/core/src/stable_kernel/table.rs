//! Interpolating cache of the radial profile used by every convolution.
//!
//! Below `r_tab` the profile and its first two derivatives are sampled on a
//! uniform radius grid and read back with cubic Hermite interpolation; beyond it
//! the asymptotic series is summed directly in powers of `r^{-α}`.

use super::series::TailSeries;
use super::{KernelConstants, KernelParams, StableKernel};
use crate::error::{domain, Result};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone)]
pub struct KernelTable {
    params: KernelParams,
    consts: KernelConstants,
    h: f64,
    inv_h: f64,
    r_tab: f64,
    p: Vec<f64>,
    dp: Vec<f64>,
    d2p: Vec<f64>,
    tail_p: Vec<f64>,
    tail_dp: Vec<f64>,
    /// `tail_y[k]`: largest `y = r^{-α}` at which the first `k + 1` tail terms suffice
    tail_y: Vec<f64>,
    inv_alpha: f64,
}

type Key = (u64, usize, u64);
static CACHE: Lazy<Mutex<HashMap<Key, Arc<KernelTable>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

impl KernelTable {
    /// Memoized table for `params`; built once per process.
    pub fn shared(params: &KernelParams) -> Result<Arc<KernelTable>> {
        let key = (params.alpha.to_bits(), params.dim, params.tol.to_bits());
        if let Some(t) = CACHE.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(KernelTable::new(params)?);
        CACHE.lock().unwrap().insert(key, t.clone());
        Ok(t)
    }

    pub fn new(params: &KernelParams) -> Result<Self> {
        params.validate()?;
        let a = params.alpha;
        if !(a > 1.0 && a < 2.0) {
            return domain(format!("kernel tables need 1 < alpha < 2, got {a}"));
        }
        let kernel = StableKernel::new(*params)?;
        let tail = TailSeries::new(a, params.dim);
        let inner_tol = params.tol * 1e-3;
        // smallest radius from which the tail series meets the tighter target
        let mut r_tab = 1e4;
        while r_tab > 4.0 && tail.eval(r_tab / 1.05, inner_tol).is_some() {
            r_tab /= 1.05;
        }
        let r_tab = r_tab.max(8.0);
        let h = 0.01;
        let n = (r_tab / h).ceil() as usize + 2;
        let r_tab = (n - 2) as f64 * h;
        let mut p = Vec::with_capacity(n);
        let mut dp = Vec::with_capacity(n);
        let mut d2p = Vec::with_capacity(n);
        for i in 0..n {
            let pt = kernel.profile_point(i as f64 * h)?;
            if !pt.d2p.is_finite() {
                return domain("second derivative unavailable for table construction");
            }
            p.push(pt.p);
            dp.push(pt.dp);
            d2p.push(pt.d2p);
        }
        // number of tail terms needed at r_tab
        let e_r = tail.eval(r_tab, inner_tol);
        let mut tail_p = Vec::new();
        let mut tail_dp = Vec::new();
        let d = params.dim as f64;
        let pv = e_r.map(|e| e.p).unwrap_or(p[n - 2]);
        // same truncation rule as the direct sum: stop at the smallest envelope term
        let mut best = f64::INFINITY;
        for (k, &b) in tail.coeffs.iter().enumerate() {
            let ex = a * (k as f64 + 1.0) + d;
            let env = tail.envelope[k] * r_tab.powf(-ex);
            if env > best || (k > 0 && env < 1e-4 * inner_tol * pv) {
                break;
            }
            best = env;
            tail_p.push(b);
            tail_dp.push(-b * ex);
        }
        // drop trailing terms once they fall below the target relative to the leading one
        let eps = 1e-2 * inner_tol / tail_p.len().max(1) as f64;
        let thr: Vec<f64> = (0..tail_p.len())
            .map(|k| if k == 0 || tail_p[k] == 0.0 { f64::INFINITY } else { (eps * tail_p[0].abs() / tail_p[k].abs()).powf(1.0 / k as f64) })
            .collect();
        let mut tail_y = vec![f64::INFINITY; tail_p.len()];
        let mut m = f64::INFINITY;
        for k in (0..tail_p.len()).rev() {
            tail_y[k] = m;
            m = m.min(thr[k]);
        }
        Ok(KernelTable {
            params: *params,
            consts: kernel.constants(),
            h,
            inv_h: 1.0 / h,
            r_tab,
            p,
            dp,
            d2p,
            tail_p,
            tail_dp,
            tail_y,
            inv_alpha: 1.0 / a,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn constants(&self) -> KernelConstants {
        self.consts
    }

    /// Radius beyond which values come from the tail series.
    pub fn r_tab(&self) -> f64 {
        self.r_tab
    }

    #[inline]
    fn hermite(&self, f: &[f64], g: &[f64], r: f64) -> f64 {
        let x = r * self.inv_h;
        let i = x as usize;
        let t = x - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * f[i] + h01 * f[i + 1] + self.h * (h10 * g[i] + h11 * g[i + 1])
    }

    /// Number of tail terms needed at `y = r^{-α}`.
    #[inline]
    fn terms(&self, y: f64) -> usize {
        self.tail_y.iter().position(|&t| y <= t).map_or(self.tail_y.len(), |k| k + 1)
    }

    #[inline]
    fn horner(c: &[f64], y: f64) -> f64 {
        let mut s = 0.0;
        for &v in c.iter().rev() {
            s = s * y + v;
        }
        s
    }

    /// P_α(r).
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        if r < self.r_tab {
            self.hermite(&self.p, &self.dp, r)
        } else {
            let y = (-self.params.alpha * r.ln()).exp();
            let rd = r.powi(-(self.params.dim as i32));
            rd * y * Self::horner(&self.tail_p[..self.terms(y)], y)
        }
    }

    /// P_α'(r).
    #[inline]
    pub fn deriv(&self, r: f64) -> f64 {
        if r < self.r_tab {
            self.hermite(&self.dp, &self.d2p, r)
        } else {
            let y = (-self.params.alpha * r.ln()).exp();
            let rd = r.powi(-(self.params.dim as i32 + 1));
            rd * y * Self::horner(&self.tail_dp[..self.terms(y)], y)
        }
    }

    /// Kernel width t^{1/α}.
    #[inline]
    pub fn width(&self, t: f64) -> f64 {
        t.powf(self.inv_alpha)
    }

    /// p_α at distance `r` and time `t`.
    #[inline]
    pub fn kernel(&self, r: f64, t: f64) -> f64 {
        let w = self.width(t);
        self.value(r / w) / w.powi(self.params.dim as i32)
    }

    /// Radial derivative of p_α at distance `r` and time `t`.
    #[inline]
    pub fn kernel_deriv(&self, r: f64, t: f64) -> f64 {
        let w = self.width(t);
        self.deriv(r / w) / w.powi(self.params.dim as i32 + 1)
    }
}
