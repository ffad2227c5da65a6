//! Duhamel–Picard iteration on the stretched free-space grid.
//!
//! On each time window `[T, T+Δ]` the solution is sought at Chebyshev–Lobatto
//! nodes `t_i` from
//!
//! ```text
//! u(t_i) = S(t_i) u0 + S(t_i − T) w(T) − ∫_T^{t_i} ∂ₓS(t_i − s) f(u(s)) ds,
//! ```
//!
//! where `w = u − S(·)u0` is the accumulated Duhamel part. Restarting only `w`
//! keeps the linear part exact to a single convolution. The flux is
//! interpolated in time across the window nodes, and the kernel singularity
//! `(t−s)^{-1/α}` is removed by `s = t − σ^{α/(α−1)}` before Gauss quadrature.

use super::{NonlinearitySpec, SchemeMeta, Trajectory, WindowRecord};
use crate::error::{domain, Error, Result};
use crate::grid::{Field, StretchedGrid};
use crate::linear_semigroup::{
    convolution_table, weighted_norm, DenseOperator, KernelKind, NormVariant, StretchedConvolver, TailModel,
};
use crate::quad::gauss;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardParams {
    /// Chebyshev–Lobatto nodes per window, endpoints included.
    pub nodes: usize,
    /// Gauss points in the substituted variable σ.
    pub gauss: usize,
    /// `C` in the window cap `C min{1, N^{-α(q-1)/(α-1)}}`.
    pub window_const: f64,
    /// Length of the first window; later windows grow by `growth` up to the cap.
    pub first_window: Option<f64>,
    pub growth: f64,
    pub max_iter: usize,
    /// Convergence threshold on successive iterates in `L^∞_{α+d}`, relative to `‖u0‖_{L^∞_{α+d}}`.
    pub tol: f64,
}

impl Default for PicardParams {
    fn default() -> Self {
        PicardParams { nodes: 7, gauss: 16, window_const: 0.25, first_window: None, growth: 2.0, max_iter: 60, tol: 1e-12 }
    }
}

fn lobatto(m: usize) -> Vec<f64> {
    (0..m).map(|i| 0.5 * (1.0 - (PI * i as f64 / (m - 1) as f64).cos())).collect()
}

fn lagrange(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|k| {
            let mut v = 1.0;
            for (j, &xj) in nodes.iter().enumerate() {
                if j != k {
                    v *= (x - xj) / (nodes[k] - xj);
                }
            }
            v
        })
        .collect()
}

struct WindowOps {
    delta: f64,
    /// `b[i-1][k]`: weight of `g(u(t_k))` in the Duhamel integral up to `t_i`
    b: Vec<Vec<DenseOperator>>,
    /// `s[i-1] = S(t_i − T)` with the tail law of `w`
    s: Vec<DenseOperator>,
    /// `S(t_i − T)` for interior nodes with the tail law of `u0`
    lin: Vec<DenseOperator>,
}

/// Window cap `C min{1, N^{-α(q-1)/(α-1)}}` with `N = ‖u0‖_{L^∞_{α+d}}`.
pub fn window_cap(u0_weighted: f64, alpha: f64, f: &NonlinearitySpec, c: f64) -> f64 {
    if f.is_linear() || u0_weighted == 0.0 {
        return c;
    }
    c * 1f64.min(u0_weighted.powf(-alpha * (f.q - 1.0) / (alpha - 1.0)))
}

/// Duhamel–Picard solve on a stretched grid; snapshots at `snap_times` and `horizon`.
pub fn solve_picard(
    u0: &Field,
    alpha: f64,
    f: &NonlinearitySpec,
    horizon: f64,
    params: PicardParams,
    snap_times: &[f64],
) -> Result<Trajectory> {
    let grid: &StretchedGrid = u0
        .grid
        .as_stretched()
        .ok_or_else(|| Error::GridMismatch("the Picard solver needs a stretched free-space grid".into()))?;
    if !(alpha > 1.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (1,2), got {alpha}"));
    }
    f.validate()?;
    if f.dim() != 1 {
        return Err(Error::GridMismatch("stretched grids are one-dimensional".into()));
    }
    if params.nodes < 3 || params.gauss < 2 || !(params.tol > 0.0) || params.max_iter == 0 {
        return domain("invalid Picard parameters");
    }
    if !(horizon > 0.0) {
        return domain("horizon must be positive");
    }
    let checkpoints = super::checkpoints(snap_times, horizon)?;
    let table = convolution_table(alpha)?;
    let conv = StretchedConvolver::new(grid, &table);
    let n = grid.len();
    let theta = alpha + 1.0;
    let u0_w = weighted_norm(u0, theta, NormVariant::Inhomogeneous).norm;
    if !u0_w.is_finite() {
        return domain("initial data not in the weighted space");
    }
    let scale = u0_w.max(f64::MIN_POSITIVE);
    let cap = window_cap(u0_w, alpha, f, params.window_const);
    let b = f.b[0];
    let m = params.nodes;
    let th = lobatto(m);
    let beta = alpha / (alpha - 1.0);
    let u0_tails = TailModel::fitted(grid, &u0.values);
    let w_tails = TailModel::symmetric(theta + 1.0);
    let f_tails = TailModel::symmetric(f.tail_exponent(theta));

    let build = |delta: f64| -> WindowOps {
        let mut bops: Vec<Vec<DenseOperator>> = Vec::with_capacity(m - 1);
        let mut sops = Vec::with_capacity(m - 1);
        let rule = gauss(params.gauss);
        for &thi in th.iter().skip(1) {
            let lam = thi * delta;
            let smax = lam.powf(1.0 / beta);
            let mut row: Vec<DenseOperator> = (0..m).map(|_| DenseOperator::zeros(n)).collect();
            if b != 0.0 {
                for (sg, wg) in rule.mapped(0.0, smax) {
                    let tau = sg.powf(beta);
                    let wt = wg * beta * sg.powf(beta - 1.0);
                    let ell = lagrange(&th, thi - tau / delta);
                    let g = conv.operator(KernelKind::Gradient, tau, f_tails);
                    for k in 0..m {
                        row[k].add_scaled(wt * ell[k] * b, &g);
                    }
                }
            }
            bops.push(row);
            sops.push(conv.operator(KernelKind::Value, lam, w_tails));
        }
        let lops = th[1..m - 1].iter().map(|&thi| conv.operator(KernelKind::Value, thi * delta, u0_tails)).collect();
        WindowOps { delta, b: bops, s: sops, lin: lops }
    };

    let mut ops: Option<WindowOps> = None;
    let mut snaps = vec![Field::new(u0.grid.clone(), u0.values.clone(), 0.0)?];
    let mut u_prev = u0.values.clone();
    let mut w_prev = vec![0.0; n];
    // S(T)u0 at the current window start, always from one direct convolution of u0
    let mut lin_start = u0.values.clone();
    let mut t0 = 0.0;
    let mut win = 0usize;
    let mut iterations = Vec::new();
    let mut windows = Vec::new();
    let mut len = params.first_window.unwrap_or(cap).min(cap);
    for &target in &checkpoints {
        // once the cap is reached the rest of the segment is split into equal
        // windows of one length, so the operators are reused
        let mut plan: Option<(f64, f64, usize, usize)> = None;
        while t0 < target * (1.0 - 1e-14) {
            let dist = target - t0;
            let delta = match plan {
                Some((start, d, k, count)) if k < count => {
                    t0 = start + k as f64 * d;
                    plan = Some((start, d, k + 1, count));
                    d
                }
                _ => {
                    let count = (dist / len - 1e-9).ceil().max(1.0);
                    let d = dist / count;
                    if len >= cap || count == 1.0 {
                        plan = Some((t0, d, 1, count as usize));
                    }
                    d
                }
            };
            // lengths equal up to rounding share operators; the window still ends exactly at t0 + delta
            if !ops.as_ref().is_some_and(|o| (o.delta - delta).abs() <= 1e-10 * delta) {
                drop(ops.take());
                ops = Some(build(delta));
            }
            let o = ops.as_ref().unwrap();
            let mut base = Vec::with_capacity(m - 1);
            for i in 1..m {
                // interior nodes advance S(T)u0 by one short step; the end node is direct
                let lin = if i == m - 1 {
                    conv.apply(KernelKind::Value, t0 + delta, u0_tails, &u0.values)
                } else {
                    o.lin[i - 1].apply(&lin_start)
                };
                let sw = o.s[i - 1].apply(&w_prev);
                base.push((lin.clone(), lin.iter().zip(&sw).map(|(a, c)| a + c).collect::<Vec<f64>>()));
            }
            let mut u: Vec<Vec<f64>> = std::iter::once(u_prev.clone()).chain(base.iter().map(|(_, v)| v.clone())).collect();
            let mut iter = 0;
            let mut first = f64::NAN;
            let mut last = f64::INFINITY;
            loop {
                iter += 1;
                let g: Vec<Vec<f64>> = u.iter().map(|v| v.iter().map(|&x| f.g(x)).collect()).collect();
                let mut diff: f64 = 0.0;
                let mut next = vec![u_prev.clone()];
                for i in 1..m {
                    let mut v = base[i - 1].1.clone();
                    if b != 0.0 {
                        for k in 0..m {
                            let c = o.b[i - 1][k].apply(&g[k]);
                            for (a, cc) in v.iter_mut().zip(&c) {
                                *a -= cc;
                            }
                        }
                    }
                    let dv: Vec<f64> = v.iter().zip(&u[i]).map(|(a, c)| a - c).collect();
                    let dn = weighted_norm(&Field { grid: u0.grid.clone(), values: dv, time: 0.0 }, theta, NormVariant::Inhomogeneous).norm;
                    diff = diff.max(dn);
                    next.push(v);
                }
                u = next;
                if iter == 1 {
                    first = diff;
                }
                if !diff.is_finite() || (iter > 3 && diff > 1e3 * first.max(params.tol * scale)) {
                    return Err(Error::NonContraction {
                        window: win,
                        t0,
                        t1: t0 + delta,
                        detail: format!("successive differences grew to {diff:.3e} after {iter} iterations"),
                    });
                }
                if diff <= params.tol * scale || b == 0.0 {
                    break;
                }
                if iter >= params.max_iter {
                    return Err(Error::NonContraction {
                        window: win,
                        t0,
                        t1: t0 + delta,
                        detail: format!("no convergence within {} iterations (last difference {diff:.3e}, previous {last:.3e})", params.max_iter),
                    });
                }
                last = diff;
            }
            iterations.push(iter);
            windows.push(WindowRecord { t0, t1: t0 + delta, iterations: iter });
            u_prev = u[m - 1].clone();
            w_prev = u_prev.iter().zip(&base[m - 2].0).map(|(a, c)| a - c).collect();
            lin_start = base[m - 2].0.clone();
            t0 += delta;
            win += 1;
            len = (len * params.growth).min(cap);
            if matches!(plan, Some((_, _, k, c)) if k == c) {
                break;
            }
        }
        t0 = target;
        snaps.push(Field::new(u0.grid.clone(), u_prev.clone(), target)?);
    }
    Ok(Trajectory {
        snapshots: snaps,
        meta: SchemeMeta {
            method: "duhamel-picard".into(),
            step: cap,
            steps: win,
            substeps: 0,
            iterations,
            windows,
        },
    })
}
