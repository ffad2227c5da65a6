//! The nonlinear Cauchy problem `u_t + (−Δ)^{α/2}u + ∇·f(u) = 0`, `u(0) = u0`,
//! by a pseudo-spectral integrating-factor scheme (periodic, fast) and a
//! Duhamel–Picard fixed point (free space, tail-accurate), plus the decay and
//! kernel-domination diagnostics.

mod initial;
mod nonlinearity;
mod picard;
mod spectral;

pub use initial::InitialData;
pub use nonlinearity::{critical_exponents, CriticalExponents, FluxForm, NonlinearitySpec};
pub use picard::{solve_picard, window_cap, PicardParams};
pub use spectral::{solve_spectral, SpectralParams};

use crate::error::{domain, Error, Result};
use crate::grid::{Field, SpatialGrid};
use crate::linear_semigroup::{convolution_table, grad_magnitude, gradient, weighted_norm, NormVariant};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub t0: f64,
    pub t1: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeMeta {
    pub method: String,
    /// time step (spectral) or window cap (Picard)
    pub step: f64,
    /// steps (spectral) or windows (Picard)
    pub steps: usize,
    /// extra advective substeps taken by the spectral scheme
    pub substeps: usize,
    /// Picard iterations per window
    pub iterations: Vec<usize>,
    pub windows: Vec<WindowRecord>,
}

/// Time-ordered snapshots sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    pub meta: SchemeMeta,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// Snapshot at time `t` (to 1e-12 relative).
    pub fn at(&self, t: f64) -> Option<&Field> {
        self.snapshots.iter().find(|s| (s.time - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn check(&self) -> Result<()> {
        let g = &self.snapshots.first().ok_or_else(|| Error::Domain("empty trajectory".into()))?.grid;
        for w in self.snapshots.windows(2) {
            if !(w[1].time > w[0].time) {
                return domain("snapshot times must increase strictly");
            }
        }
        for s in &self.snapshots {
            if !(std::sync::Arc::ptr_eq(&s.grid, g) || s.grid == *g) {
                return Err(Error::GridMismatch("snapshots on different grids".into()));
            }
        }
        Ok(())
    }
}

/// Sorted, deduplicated positive snapshot times up to and including `horizon`.
pub(crate) fn checkpoints(snap_times: &[f64], horizon: f64) -> Result<Vec<f64>> {
    let mut t: Vec<f64> = Vec::new();
    for &s in snap_times {
        if !(s > 0.0 && s.is_finite()) {
            return domain(format!("snapshot time {s} must be positive"));
        }
        if s < horizon * (1.0 - 1e-12) {
            t.push(s);
        }
    }
    t.push(horizon);
    t.sort_by(|a, b| a.total_cmp(b));
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    Ok(t)
}

/// Norm of a snapshot: L^p by the grid quadrature, sup for p = ∞.
/// Periodic grids use all nodes; stretched grids include the far tail for p = 1.
pub fn lp(v: &Field, p: f64) -> f64 {
    if p == 1.0 && v.grid.as_stretched().is_some() {
        let w = v.grid.weights();
        let s: f64 = w.iter().zip(&v.values).map(|(a, b)| a * b.abs()).sum();
        return s + v.tail_mass().abs();
    }
    v.lp_norm(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEntry {
    pub p: f64,
    /// log–log slope of ‖u(t)‖_p over the last decade
    pub slope: f64,
    pub predicted_slope: f64,
    /// Largest relative one-step increase of ‖u(t)‖_p (≤ 0 when non-increasing).
    pub max_relative_increase: f64,
    pub norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub alpha: f64,
    pub window: [f64; 2],
    pub entries: Vec<DecayEntry>,
}

/// Fitted time-decay exponents of `‖u(t)‖_p` over the last decade of the trajectory
/// against `−(d/α)(1−1/p)`, plus the monotonicity of every norm.
pub fn decay_report(traj: &Trajectory, alpha: f64, p_list: &[f64]) -> Result<DecayReport> {
    traj.check()?;
    let t_end = traj.snapshots.last().unwrap().time;
    let t_lo = t_end / 10.0;
    let first_pos = traj.snapshots.iter().map(|s| s.time).find(|&t| t > 0.0).unwrap_or(t_end);
    if first_pos > t_lo * (1.0 + 1e-12) {
        return domain(format!("trajectory spans less than one decade of time ({first_pos} to {t_end})"));
    }
    let d = traj.snapshots[0].grid.dim() as f64;
    let mut entries = Vec::new();
    for &p in p_list {
        let norms: Vec<f64> = traj.snapshots.iter().map(|s| lp(s, p)).collect();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (s, &nv) in traj.snapshots.iter().zip(&norms) {
            if s.time >= t_lo * (1.0 - 1e-12) && nv > 0.0 {
                xs.push(s.time.ln());
                ys.push(nv.ln());
            }
        }
        if xs.len() < 2 {
            return domain("fewer than two snapshots in the last decade");
        }
        let (slope, _) = crate::farfield::linear_fit(&xs, &ys);
        let max_inc = norms.windows(2).map(|w| (w[1] - w[0]) / w[0].max(f64::MIN_POSITIVE)).fold(f64::NEG_INFINITY, f64::max);
        let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
        entries.push(DecayEntry { p, slope, predicted_slope: -(d / alpha) * (1.0 - inv_p), max_relative_increase: max_inc, norms });
    }
    Ok(DecayReport { alpha, window: [t_lo, t_end], entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// `sup |u(x,t)| / p_α(x, 1+t)` over snapshots and trusted nodes
    pub constant: f64,
    pub per_snapshot: Vec<f64>,
    /// `‖∇u(t)‖_{L^∞_{α+d+1}} / (1+t)` per snapshot
    pub gradient_ratios: Vec<f64>,
    /// `‖u(t)‖_{L^∞_{α+d}} / (1+t)` per snapshot
    pub weighted_ratios: Vec<f64>,
    pub outside_hypotheses: bool,
}

/// Empirical constant of `|u(x,t)| ≤ C p_α(x, 1+t)`. On periodic grids only
/// `|x| ≤ L/4` is used. Flags `outside_hypotheses` when `q < q̃`.
pub fn domination_check(traj: &Trajectory, alpha: f64, f: &NonlinearitySpec) -> Result<DominationReport> {
    traj.check()?;
    let g0 = traj.snapshots[0].grid.clone();
    if g0.dim() != 1 {
        return domain("kernel domination is measured in d = 1");
    }
    let crit = critical_exponents(alpha, 1)?;
    let tab = convolution_table(alpha)?;
    let trusted = match g0.as_ref() {
        SpatialGrid::Uniform(_) => g0.trusted_radius(),
        SpatialGrid::Stretched(_) => f64::INFINITY,
    };
    let th = alpha + 1.0;
    let mut per = Vec::new();
    let mut grads = Vec::new();
    let mut weighted = Vec::new();
    for s in &traj.snapshots {
        let mut c: f64 = 0.0;
        for (i, &v) in s.values.iter().enumerate() {
            let r = g0.radius(i);
            if r <= trusted {
                c = c.max(v.abs() / tab.kernel(r, 1.0 + s.time));
            }
        }
        per.push(c);
        let gm = grad_magnitude(&gradient(s)?);
        let restrict = |f: &Field| -> Field {
            let vals = f.values.iter().enumerate().map(|(i, &v)| if g0.radius(i) <= trusted { v } else { 0.0 }).collect();
            f.with_values(vals)
        };
        grads.push(weighted_norm(&restrict(&gm), th + 1.0, NormVariant::Inhomogeneous).norm / (1.0 + s.time));
        weighted.push(weighted_norm(&restrict(s), th, NormVariant::Inhomogeneous).norm / (1.0 + s.time));
    }
    Ok(DominationReport {
        constant: per.iter().fold(0.0, |m: f64, &v| m.max(v)),
        per_snapshot: per,
        gradient_ratios: grads,
        weighted_ratios: weighted,
        outside_hypotheses: f.q < crit.q_tilde - 1e-12,
    })
}
