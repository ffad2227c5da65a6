//! Isotropic α-stable profiles.
//!
//! `P_α` is the inverse Fourier transform of `exp(-|ξ|^α)` on `R^d`, and the
//! space-time kernel is
//!
//! ```text
//! p_α(x, t) = t^{-d/α} P_α(x t^{-1/α}).
//! ```
//!
//! At infinity `P_α(x) ~ c0 |x|^{-(α+d)}` and `∇P_α(x) ~ -c1 x |x|^{-(α+d+2)}`.
//! Values are computed in three regimes: the even power series at the origin,
//! a midrange integral, and the optimally truncated asymptotic series.

mod integral;
mod series;
pub mod table;

pub use table::KernelTable;

use crate::error::{domain, Error, Result};
use crate::special::gamma;
use serde::{Deserialize, Serialize};
use series::{Eval3, OriginSeries, TailSeries};
use std::f64::consts::PI;

/// Stability index, dimension and relative accuracy target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub alpha: f64,
    pub dim: usize,
    pub tol: f64,
}

impl KernelParams {
    pub const DEFAULT_TOL: f64 = 1e-8;

    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        Self::with_tol(alpha, dim, Self::DEFAULT_TOL)
    }

    pub fn with_tol(alpha: f64, dim: usize, tol: f64) -> Result<Self> {
        let p = KernelParams { alpha, dim, tol };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alpha;
        if !(a.is_finite() && ((a > 1.0 && a < 2.0) || a == 1.0 || a == 2.0)) {
            return domain(format!("alpha = {a} outside (1, 2) and not an oracle endpoint"));
        }
        if !(1..=3).contains(&self.dim) {
            return domain(format!("dim = {} not in {{1, 2, 3}}", self.dim));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return domain(format!("tol = {} not in (0, 1e-3]", self.tol));
        }
        Ok(())
    }

    /// True for the closed-form endpoints alpha = 1 (Cauchy) and alpha = 2 (Gaussian).
    pub fn is_oracle_endpoint(&self) -> bool {
        self.alpha == 1.0 || self.alpha == 2.0
    }
}

/// Far-field constants of the profile and its gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub c0: f64,
    pub c1: f64,
}

pub fn kernel_constants(params: &KernelParams) -> Result<KernelConstants> {
    params.validate()?;
    let a = params.alpha;
    let d = params.dim as f64;
    let s = (a * PI / 2.0).sin();
    let common = a * 2f64.powf(a - 1.0) * s * gamma(a / 2.0);
    let c0 = common * PI.powf(-(d + 2.0) / 2.0) * gamma((a + d) / 2.0);
    let c1 = 2.0 * PI * common * PI.powf(-(d + 4.0) / 2.0) * gamma((a + d + 2.0) / 2.0);
    Ok(KernelConstants { c0, c1 })
}

/// Which representation produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
pub enum Regime {
    #[serde(rename = "series-origin")]
    SeriesOrigin,
    #[serde(rename = "quadrature")]
    Quadrature,
    #[serde(rename = "series-tail")]
    SeriesTail,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::SeriesOrigin => "series-origin",
            Regime::Quadrature => "quadrature",
            Regime::SeriesTail => "series-tail",
        }
    }
}

/// Radial profile value with derivatives. `d2p` is NaN where unavailable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub r: f64,
    pub p: f64,
    pub dp: f64,
    pub d2p: f64,
    pub err: f64,
    pub regime: Regime,
}

/// Profile samples on an ascending set of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfileTable {
    pub alpha: f64,
    pub dim: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub regime_tags: Vec<Regime>,
}

impl RadialProfileTable {
    /// Checks strict positivity and monotone decrease (up to `tol` relative).
    pub fn check(&self, tol: f64) -> Result<()> {
        for w in self.radii.windows(2) {
            if !(w[1] > w[0]) {
                return domain("radii must be strictly ascending");
            }
        }
        for (i, &v) in self.values.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::Accuracy {
                    what: format!("profile at r = {} is not positive", self.radii[i]),
                    achieved: v,
                    target: 0.0,
                });
            }
        }
        for i in 1..self.values.len() {
            if self.values[i] > self.values[i - 1] * (1.0 + tol) {
                return Err(Error::Accuracy {
                    what: format!("profile increases at r = {}", self.radii[i]),
                    achieved: self.values[i] / self.values[i - 1] - 1.0,
                    target: tol,
                });
            }
        }
        Ok(())
    }
}

/// Evaluator for one (alpha, d, tol), holding series coefficients and switch radii.
#[derive(Debug, Clone)]
pub struct StableKernel {
    params: KernelParams,
    consts: KernelConstants,
    origin: OriginSeries,
    tail: TailSeries,
    r_origin: f64,
    r_tail: f64,
    line: Option<Box<StableKernel>>,
}

impl StableKernel {
    pub fn new(params: KernelParams) -> Result<Self> {
        params.validate()?;
        let consts = kernel_constants(&params)?;
        let origin = OriginSeries::new(params.alpha, params.dim);
        let tail = TailSeries::new(params.alpha, params.dim);
        let line = if params.dim == 1 {
            None
        } else {
            Some(Box::new(StableKernel::new(KernelParams { dim: 1, tol: params.tol * 1e-2, ..params })?))
        };
        let mut k = StableKernel { params, consts, origin, tail, r_origin: 0.0, r_tail: f64::INFINITY, line };
        k.choose_switch_radii();
        Ok(k)
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn constants(&self) -> KernelConstants {
        self.consts
    }

    /// Radii where the origin series hands over to the midrange and the midrange to the tail series.
    pub fn switch_radii(&self) -> (f64, f64) {
        (self.r_origin, self.r_tail)
    }

    fn origin_ok(&self, r: f64) -> Option<Eval3> {
        self.origin.eval(r, self.params.tol).filter(|e| e.err <= 0.1 * self.params.tol * e.p.abs() && e.p > 0.0)
    }

    fn tail_ok(&self, r: f64) -> Option<Eval3> {
        if self.params.alpha == 2.0 {
            return None;
        }
        self.tail.eval(r, 0.1 * self.params.tol)
    }

    fn choose_switch_radii(&mut self) {
        let mut r = 0.02;
        let mut last_origin = 0.0;
        while r < 500.0 {
            if self.origin_ok(r).is_none() {
                break;
            }
            last_origin = r;
            r *= 1.05;
        }
        let mut first_tail = f64::INFINITY;
        if self.params.alpha < 2.0 {
            let mut r = 1e5;
            while r > 0.02 {
                if self.tail_ok(r).is_none() {
                    break;
                }
                first_tail = r;
                r /= 1.05;
            }
        }
        let (mut ro, mut rt) = (0.95 * last_origin, 1.05 * first_tail);
        if ro >= rt {
            let m = (ro * rt).sqrt();
            ro = m;
            rt = m;
        }
        self.r_origin = ro;
        self.r_tail = rt;
    }

    fn midrange(&self, r: f64) -> Option<Eval3> {
        let a = self.params.alpha;
        let tol = self.params.tol;
        let good = |e: &Eval3| e.p > 0.0 && e.err <= 0.1 * tol * e.p;
        match self.params.dim {
            1 => {
                // beyond a few widths the Fourier integral loses the value to cancellation
                if a > 1.0 && r > 4.0 {
                    let z = integral::zolotarev_d1(a, r, tol);
                    if good(&z) {
                        return Some(z);
                    }
                }
                let e = integral::fourier_d1(a, r, tol);
                if good(&e) {
                    return Some(e);
                }
                if a > 1.0 && r <= 4.0 {
                    let z = integral::zolotarev_d1(a, r, tol);
                    if good(&z) {
                        return Some(z);
                    }
                }
                None
            }
            2 => {
                let line = self.line.as_ref();
                let abel = || {
                    let line = line?;
                    let d1 = |u: f64| line.eval3(u).ok().map(|(e, _)| e);
                    integral::abel_d2(r, tol, &d1).filter(good)
                };
                // the Bessel oscillation defeats quadrature once the profile is Gaussian-thin
                let near_gaussian = a > 1.9 && r > 4.0;
                if near_gaussian {
                    if let Some(e) = abel() {
                        return Some(e);
                    }
                }
                let e = integral::bessel_d2(a, r, tol);
                if good(&e) {
                    return Some(e);
                }
                if near_gaussian {
                    None
                } else {
                    abel()
                }
            }
            _ => {
                // P3(r) = -P1'(r) / (2 pi r)
                let line = self.line.as_ref()?;
                let (e, _) = line.eval3(r).ok()?;
                let tp = 2.0 * PI * r;
                let p = -e.dp / tp;
                let dp = (e.dp / r - e.d2p) / tp;
                let rel = e.err / e.p.abs().max(1e-300) * (1.0 + r) + 1e-14;
                Some(Eval3 { p, dp, d2p: f64::NAN, err: rel * p.abs() })
            }
        }
    }

    fn eval3(&self, r: f64) -> Result<(Eval3, Regime)> {
        if !(r >= 0.0) || !r.is_finite() {
            return domain(format!("radius {r} must be finite and nonnegative"));
        }
        let tol = self.params.tol;
        let attempt = if r <= self.r_origin {
            self.origin_ok(r).map(|e| (e, Regime::SeriesOrigin))
        } else if r >= self.r_tail {
            self.tail_ok(r).map(|e| (e, Regime::SeriesTail))
        } else {
            None
        };
        let attempt = attempt.or_else(|| self.midrange(r).map(|e| (e, Regime::Quadrature)));
        match attempt {
            Some((e, reg)) if e.err <= tol * e.p.abs() && e.p > 0.0 => Ok((e, reg)),
            Some((e, _)) => Err(Error::Accuracy {
                what: format!("P_alpha at r = {r}"),
                achieved: e.err / e.p.abs().max(1e-300),
                target: tol,
            }),
            None => Err(Error::Accuracy {
                what: format!("P_alpha at r = {r}: no representation reached the target"),
                achieved: f64::INFINITY,
                target: tol,
            }),
        }
    }

    /// Value and radial derivatives of the profile at radius r.
    pub fn profile_point(&self, r: f64) -> Result<ProfilePoint> {
        let (e, regime) = self.eval3(r)?;
        Ok(ProfilePoint { r, p: e.p, dp: e.dp, d2p: e.d2p, err: e.err, regime })
    }

    /// Evaluates with a forced representation; used to check agreement at the switch radii.
    pub fn profile_point_in(&self, r: f64, regime: Regime) -> Result<ProfilePoint> {
        let e = match regime {
            Regime::SeriesOrigin => self.origin.eval(r, self.params.tol),
            Regime::SeriesTail => self.tail_ok(r),
            Regime::Quadrature => self.midrange(r),
        };
        match e {
            Some(e) => Ok(ProfilePoint { r, p: e.p, dp: e.dp, d2p: e.d2p, err: e.err, regime }),
            None => Err(Error::Accuracy {
                what: format!("{} representation at r = {r}", regime.tag()),
                achieved: f64::INFINITY,
                target: self.params.tol,
            }),
        }
    }

    /// P_α(r).
    pub fn eval_profile(&self, r: f64) -> Result<f64> {
        Ok(self.eval3(r)?.0.p)
    }

    /// Samples the profile on ascending radii with regime tags.
    pub fn eval_profile_table(&self, radii: &[f64]) -> Result<RadialProfileTable> {
        let mut values = Vec::with_capacity(radii.len());
        let mut derivatives = Vec::with_capacity(radii.len());
        let mut regime_tags = Vec::with_capacity(radii.len());
        for &r in radii {
            let (e, reg) = self.eval3(r)?;
            values.push(e.p);
            derivatives.push(e.dp);
            regime_tags.push(reg);
        }
        let t = RadialProfileTable {
            alpha: self.params.alpha,
            dim: self.params.dim,
            radii: radii.to_vec(),
            values,
            derivatives,
            regime_tags,
        };
        t.check(self.params.tol)?;
        Ok(t)
    }

    fn check_point(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.params.dim {
            return domain(format!("point has {} coordinates, expected {}", x.len(), self.params.dim));
        }
        Ok(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// ∇P_α(x) = P_α'(|x|) x/|x|, zero at the origin.
    pub fn eval_profile_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.check_point(x)?;
        if r == 0.0 {
            return Ok(vec![0.0; x.len()]);
        }
        let dp = self.eval3(r)?.0.dp;
        Ok(x.iter().map(|v| dp * v / r).collect())
    }

    /// p_α(x, t) = t^{-d/α} P_α(x t^{-1/α}).
    pub fn eval_kernel(&self, x: &[f64], t: f64) -> Result<f64> {
        let r = self.check_point(x)?;
        let w = self.width(t)?;
        Ok(self.eval3(r / w)?.0.p / w.powi(self.params.dim as i32))
    }

    /// ∇_x p_α(x, t).
    pub fn eval_kernel_grad(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let r = self.check_point(x)?;
        let w = self.width(t)?;
        if r == 0.0 {
            return Ok(vec![0.0; x.len()]);
        }
        let dp = self.eval3(r / w)?.0.dp / w.powi(self.params.dim as i32 + 1);
        Ok(x.iter().map(|v| dp * v / r).collect())
    }

    fn width(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("time t = {t} must be positive"));
        }
        Ok(t.powf(1.0 / self.params.alpha))
    }

    /// Leading far-field term of the profile (`which = Value`) or of its gradient.
    pub fn tail_expansion(&self, x: &[f64], which: TailWhich) -> Result<Vec<f64>> {
        let r = self.check_point(x)?;
        if r == 0.0 {
            return domain("tail expansion needs |x| > 0");
        }
        let s = self.params.alpha + self.params.dim as f64;
        Ok(match which {
            TailWhich::Value => vec![self.consts.c0 * r.powf(-s)],
            TailWhich::Gradient => {
                let f = -self.consts.c1 * r.powf(-(s + 2.0));
                x.iter().map(|v| f * v).collect()
            }
        })
    }
}

/// Selector for [`StableKernel::tail_expansion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailWhich {
    Value,
    Gradient,
}

/// Closed forms at the endpoints: multivariate Cauchy (alpha = 1) and Gaussian (alpha = 2).
pub fn closed_form_oracle(alpha: f64, dim: usize, x: &[f64]) -> Result<f64> {
    if dim == 0 || x.len() != dim {
        return domain("point dimension must match dim >= 1");
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let d = dim as f64;
    if alpha == 1.0 {
        Ok(gamma((d + 1.0) / 2.0) * PI.powf(-(d + 1.0) / 2.0) * (1.0 + r2).powf(-(d + 1.0) / 2.0))
    } else if alpha == 2.0 {
        Ok((4.0 * PI).powf(-d / 2.0) * (-r2 / 4.0).exp())
    } else {
        domain(format!("no closed form for alpha = {alpha}"))
    }
}
