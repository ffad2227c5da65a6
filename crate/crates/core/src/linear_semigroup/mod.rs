//! The linear semigroup `S_α(t) v = p_α(·, t) * v`, weighted sup norms and the
//! empirical constants of the standard semigroup estimates.

mod spectral;
mod stretched;

pub use spectral::Spectral;
pub use stretched::{DenseOperator, KernelKind, StretchedConvolver, TailModel};

use crate::error::{domain, Error, Result};
use crate::grid::{lagrange4_deriv, Field, SpatialGrid, StretchedGrid};
use crate::stable_kernel::{KernelParams, KernelTable};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Accuracy target of the kernel tables used by grid convolutions.
pub const CONVOLUTION_TOL: f64 = 1e-10;

/// Shared d = 1 kernel table for grid convolutions.
pub fn convolution_table(alpha: f64) -> Result<Arc<KernelTable>> {
    KernelTable::shared(&KernelParams::with_tol(alpha, 1, CONVOLUTION_TOL)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (1,2), got {alpha}"))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("semigroup time {t} must be positive"))
    }
}

/// `S_α(t) v`. Exact multiplier on periodic grids; product-integration
/// convolution with a power-law tail continuation on stretched grids.
pub fn apply_semigroup(v: &Field, alpha: f64, t: f64) -> Result<Field> {
    check_alpha(alpha)?;
    check_time(t)?;
    let values = match v.grid.as_ref() {
        SpatialGrid::Uniform(g) => Spectral::new(g).heat(&v.values, alpha, t),
        SpatialGrid::Stretched(g) => {
            let table = convolution_table(alpha)?;
            let tails = TailModel::fitted(g, &v.values);
            StretchedConvolver::new(g, &table).apply(KernelKind::Value, t, tails, &v.values)
        }
    };
    Field::new(v.grid.clone(), values, v.time + t)
}

/// Trigonometric interpolation of a 1-D periodic field at arbitrary points.
pub fn resample_periodic(v: &Field, xs: &[f64]) -> Result<Vec<f64>> {
    match v.grid.as_ref() {
        SpatialGrid::Uniform(g) if g.dim == 1 => Ok(Spectral::new(g).interpolate(&v.values, xs)),
        _ => Err(Error::GridMismatch("resampling needs a 1-D uniform periodic grid".into())),
    }
}

/// Components of `∇ S_α(t) v`.
pub fn apply_semigroup_grad(v: &Field, alpha: f64, t: f64) -> Result<Vec<Field>> {
    check_alpha(alpha)?;
    check_time(t)?;
    match v.grid.as_ref() {
        SpatialGrid::Uniform(g) => {
            let sp = Spectral::new(g);
            let heated = sp.heat(&v.values, alpha, t);
            (0..g.dim).map(|ax| Field::new(v.grid.clone(), sp.derivative(&heated, ax), v.time + t)).collect()
        }
        SpatialGrid::Stretched(g) => {
            let table = convolution_table(alpha)?;
            let tails = TailModel::fitted(g, &v.values);
            let vals = StretchedConvolver::new(g, &table).apply(KernelKind::Gradient, t, tails, &v.values);
            Ok(vec![Field::new(v.grid.clone(), vals, v.time + t)?])
        }
    }
}

/// Spatial gradient: spectral on periodic grids, fourth-order differences
/// (derivative of the local cubic through four nodes) on stretched grids.
pub fn gradient(v: &Field) -> Result<Vec<Field>> {
    match v.grid.as_ref() {
        SpatialGrid::Uniform(g) => {
            let sp = Spectral::new(g);
            (0..g.dim).map(|ax| Field::new(v.grid.clone(), sp.derivative(&v.values, ax), v.time)).collect()
        }
        SpatialGrid::Stretched(g) => Ok(vec![Field::new(v.grid.clone(), stretched_derivative(g, &v.values), v.time)?]),
    }
}

pub(crate) fn stretched_derivative(g: &StretchedGrid, v: &[f64]) -> Vec<f64> {
    let x = g.nodes();
    let n = x.len();
    (0..n)
        .map(|i| {
            // centred stencil where possible
            let s = i.saturating_sub(1).min(n - 4);
            let s = if i >= 2 && i + 1 < n && x[i] < 0.0 { (i - 2).min(n - 4) } else { s };
            let l = lagrange4_deriv(&x[s..s + 4], x[i]);
            (0..4).map(|k| l[k] * v[s + k]).sum()
        })
        .collect()
}

/// Weight `(1+|x|)^θ` or `|x|^θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormVariant {
    Inhomogeneous,
    Homogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormReport {
    pub theta: f64,
    pub norm: f64,
    pub argmax_point: [f64; 2],
    pub argmax_index: usize,
}

/// Discrete weighted sup norm; ties go to the node of smallest |x|.
pub fn weighted_norm(v: &Field, theta: f64, variant: NormVariant) -> WeightedNormReport {
    let mut best = (0.0f64, f64::INFINITY, 0usize);
    for (i, &val) in v.values.iter().enumerate() {
        let r = v.grid.radius(i);
        let w = match variant {
            NormVariant::Inhomogeneous => (1.0 + r).powf(theta),
            NormVariant::Homogeneous => r.powf(theta),
        };
        let m = val.abs() * w;
        if m > best.0 || (m == best.0 && m > 0.0 && r < best.1) {
            best = (m, r, i);
        }
    }
    let idx = if best.0 > 0.0 { best.2 } else { nearest_origin(&v.grid) };
    WeightedNormReport { theta, norm: best.0, argmax_point: v.grid.point(idx), argmax_index: idx }
}

fn nearest_origin(g: &SpatialGrid) -> usize {
    (0..g.len()).min_by(|&a, &b| g.radius(a).total_cmp(&g.radius(b))).unwrap_or(0)
}

/// `‖v‖_{L^∞_{α+d}} + ‖∇v‖_{L^∞_{α+d+1}}`, the gradient norm taken on |∇v|.
pub fn e_norm(v: &Field, grad: &[Field], alpha: f64) -> Result<f64> {
    let d = v.grid.dim();
    if grad.len() != d {
        return Err(Error::GridMismatch(format!("{} gradient components for dimension {d}", grad.len())));
    }
    for g in grad {
        v.same_grid(g)?;
    }
    let th = alpha + d as f64;
    let mag = grad_magnitude(grad);
    Ok(weighted_norm(v, th, NormVariant::Inhomogeneous).norm + weighted_norm(&mag, th + 1.0, NormVariant::Inhomogeneous).norm)
}

pub(crate) fn grad_magnitude(grad: &[Field]) -> Field {
    let n = grad[0].values.len();
    let vals = (0..n).map(|i| grad.iter().map(|g| g.values[i] * g.values[i]).sum::<f64>().sqrt()).collect();
    grad[0].with_values(vals)
}

/// Ratio trajectory of one estimate: LHS / RHS at each time, and its maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateTrace {
    pub name: String,
    pub ratios: Vec<f64>,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupBoundsReport {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub estimates: Vec<EstimateTrace>,
}

impl SemigroupBoundsReport {
    pub fn get(&self, name: &str) -> Option<&EstimateTrace> {
        self.estimates.iter().find(|e| e.name == name)
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Empirical constants of
/// `‖S v‖_∞ ≤ C min{t^{-d/α}‖v‖₁, ‖v‖_∞}` ("St1"),
/// `‖S v‖_{L^∞_{α+d}} ≤ C(1+t)‖v‖_{L^∞_{α+d}}` ("St2"),
/// `‖∇S v‖_{L^∞_{α+d}} ≤ C t^{-1/α}‖v‖_{L^∞_{α+d}} + C t^{1-1/α}‖v‖₁` ("St3"),
/// and, when `with_gradient`, the E-norm analogues "ST1", "ST2", "ST3".
pub fn verify_semigroup_bounds(v0: &Field, alpha: f64, times: &[f64], with_gradient: bool) -> Result<SemigroupBoundsReport> {
    check_alpha(alpha)?;
    if times.is_empty() {
        return domain("no times given");
    }
    let d = v0.grid.dim() as f64;
    let th = alpha + d;
    let inh = NormVariant::Inhomogeneous;
    let l1 = v0.lp_norm(1.0);
    let linf = v0.sup_norm();
    let lw = weighted_norm(v0, th, inh).norm;
    let g0 = if with_gradient { Some(gradient(v0)?) } else { None };
    let e0 = match &g0 {
        Some(g) => e_norm(v0, g, alpha)?,
        None => 0.0,
    };
    let grad_inf0 = g0.as_ref().map(|g| grad_magnitude(g).sup_norm()).unwrap_or(0.0);
    let names: &[&str] = if with_gradient { &["St1", "St2", "St3", "ST1", "ST2", "ST3"] } else { &["St1", "St2", "St3"] };
    let mut traces: Vec<EstimateTrace> =
        names.iter().map(|n| EstimateTrace { name: n.to_string(), ratios: Vec::new(), constant: 0.0 }).collect();
    for &t in times {
        check_time(t)?;
        let s = apply_semigroup(v0, alpha, t)?;
        let gs = apply_semigroup_grad(v0, alpha, t)?;
        let gmag = grad_magnitude(&gs);
        let s_inf = s.sup_norm();
        let ti = t.powf(-1.0 / alpha);
        traces[0].ratios.push(ratio(s_inf, (t.powf(-d / alpha) * l1).min(linf)));
        traces[1].ratios.push(ratio(weighted_norm(&s, th, inh).norm, (1.0 + t) * lw));
        let gw = weighted_norm(&gmag, th, inh).norm;
        traces[2].ratios.push(ratio(gw, ti * lw + t * ti * l1));
        if with_gradient {
            let st1_rhs = (t.powf(-(d + 1.0) / alpha) * l1).min(ti * linf).min(grad_inf0);
            traces[3].ratios.push(ratio(gmag.sup_norm(), st1_rhs));
            let es = e_norm(&s, &gs, alpha)?;
            traces[4].ratios.push(ratio(es, (1.0 + t) * e0));
            // E norm of ∇S v: weighted ∇S v plus weighted second derivatives
            let second: Vec<Field> = gs.iter().map(|g| gradient(g).map(|h| grad_magnitude(&h))).collect::<Result<_>>()?;
            let hess = grad_magnitude(&second);
            let eg = gw + weighted_norm(&hess, th + 1.0, inh).norm;
            traces[5].ratios.push(ratio(eg, ti * e0 + t * ti * l1));
        }
    }
    for tr in &mut traces {
        tr.constant = tr.ratios.iter().fold(0.0, |m, &r| m.max(r));
    }
    Ok(SemigroupBoundsReport { alpha, times: times.to_vec(), estimates: traces })
}
