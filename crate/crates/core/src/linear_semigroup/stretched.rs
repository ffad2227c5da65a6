//! Free-space convolution with p_α(·, t) or its gradient on a stretched grid.
//!
//! The discrete operator integrates the kernel exactly (to quadrature accuracy)
//! against the piecewise cubic interpolant of the nodal data:
//!
//! ```text
//! (K v)(x_i) = Σ_c ∫_{cell c} k(x_i − y) I_c[v](y) dy + tail beyond R_max.
//! ```
//!
//! Cells far from `x_i` on the scale of the kernel use the interpolant of the
//! product `k·v`, which reduces to nodal weights `Q_j k(x_i − x_j)`. Near cells
//! are integrated with Gauss rules on pieces graded toward `x_i`. Beyond
//! `R_max` the data are continued as `v_edge (R_max/|y|)^γ`.

use crate::grid::{lagrange4, StretchedGrid};
use crate::quad::gauss;
use crate::stable_kernel::KernelTable;
use rayon::prelude::*;

/// Convolution with the kernel itself or with its x-derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Value,
    Gradient,
}

/// Decay exponents of the data continuation beyond each end of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TailModel {
    pub left: Option<f64>,
    pub right: Option<f64>,
}

impl TailModel {
    pub fn symmetric(gamma: f64) -> Self {
        TailModel { left: Some(gamma), right: Some(gamma) }
    }

    /// Exponents fitted to the two outermost nodes on each side.
    pub fn fitted(grid: &StretchedGrid, v: &[f64]) -> Self {
        let x = grid.nodes();
        let n = x.len();
        let f = |i0: usize, i1: usize| crate::grid::tail_law(x[i0].abs(), v[i0], x[i1].abs(), v[i1]).map(|(_, g)| g);
        TailModel { left: f(1, 0), right: f(n - 2, n - 1) }
    }
}

/// Dense n×n operator, row-major.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub n: usize,
    pub a: Vec<f64>,
}

impl DenseOperator {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let row = &self.a[i * n..(i + 1) * n];
            *o = dot(row, v);
        });
        out
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &DenseOperator) {
        self.a.par_chunks_mut(self.n).zip(other.a.par_chunks(self.n)).for_each(|(r, o)| {
            for (x, y) in r.iter_mut().zip(o) {
                *x += s * y;
            }
        });
    }

    pub fn zeros(n: usize) -> Self {
        DenseOperator { n, a: vec![0.0; n * n] }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // fixed-order four-way accumulation
    let mut s = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        s[0] += a[k] * b[k];
        s[1] += a[k + 1] * b[k + 1];
        s[2] += a[k + 2] * b[k + 2];
        s[3] += a[k + 3] * b[k + 3];
    }
    let mut t = (s[0] + s[1]) + (s[2] + s[3]);
    for k in 4 * chunks..a.len() {
        t += a[k] * b[k];
    }
    t
}

/// Builds convolution operators for one grid and kernel table.
pub struct StretchedConvolver<'a> {
    grid: &'a StretchedGrid,
    table: &'a KernelTable,
    eta: f64,
}

impl<'a> StretchedConvolver<'a> {
    pub fn new(grid: &'a StretchedGrid, table: &'a KernelTable) -> Self {
        let eta = 0.05f64.max(1.5 * (grid.ratio - 1.0));
        StretchedConvolver { grid, table, eta }
    }

    #[inline]
    fn kern(&self, kind: KernelKind, z: f64, inv_w: f64) -> f64 {
        let r = z.abs() * inv_w;
        match kind {
            KernelKind::Value => self.table.value(r) * inv_w,
            KernelKind::Gradient => {
                let g = self.table.deriv(r) * inv_w * inv_w;
                if z < 0.0 {
                    -g
                } else {
                    g
                }
            }
        }
    }

    /// Applies the operator for lag `t` to `v` without storing it.
    pub fn apply(&self, kind: KernelKind, t: f64, tails: TailModel, v: &[f64]) -> Vec<f64> {
        self.operator(kind, t, tails).apply(v)
    }

    /// Dense operator for `v ↦ ∫ k(x − y, t) v(y) dy`.
    pub fn operator(&self, kind: KernelKind, t: f64, tails: TailModel) -> DenseOperator {
        let x = self.grid.nodes();
        let q = self.grid.weights();
        let n = x.len();
        let w = self.table.width(t);
        let inv_w = 1.0 / w;
        let sym = match kind {
            KernelKind::Value => 1.0,
            KernelKind::Gradient => -1.0,
        };
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = q[i] * self.kern(kind, 0.0, inv_w);
            let xi = x[i];
            for j in (i + 1)..n {
                let k = self.kern(kind, xi - x[j], inv_w);
                a[i * n + j] = q[j] * k;
                a[j * n + i] = q[i] * sym * k;
            }
        }
        a.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            self.correct_row(kind, i, w, inv_w, tails, row);
        });
        DenseOperator { n, a }
    }

    fn is_near(&self, i: usize, c: usize, w: f64) -> bool {
        let x = self.grid.nodes();
        let (lo, hi) = (x[c], x[c + 1]);
        let xi = x[i];
        let dist = if xi <= lo { lo - xi } else { xi - hi }.max(0.0);
        (hi - lo) / dist.max(w) > self.eta
    }

    fn correct_row(&self, kind: KernelKind, i: usize, w: f64, inv_w: f64, tails: TailModel, row: &mut [f64]) {
        let g = self.grid;
        let x = g.nodes();
        let n = x.len();
        let cw = g.cell_weights();
        let xi = x[i];
        let ncell = n - 1;
        // contiguous range of near cells around node i
        let mut c_lo = usize::MAX;
        let mut c_hi = 0usize;
        if i > 0 && self.is_near(i, i - 1, w) {
            c_lo = i - 1;
            c_hi = i - 1;
            while c_lo > 0 && self.is_near(i, c_lo - 1, w) {
                c_lo -= 1;
            }
        }
        if i < ncell && self.is_near(i, i, w) {
            if c_lo == usize::MAX {
                c_lo = i;
            }
            c_hi = i;
            while c_hi + 1 < ncell && self.is_near(i, c_hi + 1, w) {
                c_hi += 1;
            }
        }
        if c_lo != usize::MAX {
            let j_lo = g.stencil_start(c_lo);
            let j_hi = g.stencil_start(c_hi) + 3;
            let mut local = vec![0.0; j_hi - j_lo + 1];
            let adjacent_left = i > 0 && c_lo < i;
            let adjacent_right = i < ncell && c_hi >= i;
            for c in c_lo..=c_hi {
                let s = g.stencil_start(c);
                let subtract = if kind == KernelKind::Gradient && (c + 1 == i || c == i) { Some(i - s) } else { None };
                let vals = self.integrate_cell(kind, xi, c, s, w, inv_w, subtract);
                for k in 0..4 {
                    local[s + k - j_lo] += vals[k];
                }
            }
            if kind == KernelKind::Gradient {
                // the constant part of the interpolant against the kernel derivative, in closed form
                let p = |z: f64| self.kern(KernelKind::Value, z, inv_w);
                let mut add = 0.0;
                match (adjacent_left, adjacent_right) {
                    (true, true) => add += p(xi - x[i - 1]) - p(xi - x[i + 1]),
                    (true, false) => add += p(xi - x[i - 1]) - p(0.0),
                    (false, true) => add += p(0.0) - p(xi - x[i + 1]),
                    _ => {}
                }
                local[i - j_lo] += add;
            }
            for j in j_lo..=j_hi {
                let mut far_w = 0.0;
                for c in j.saturating_sub(3)..(j + 4).min(ncell) {
                    let s = g.stencil_start(c);
                    if j >= s && j < s + 4 && !(c >= c_lo && c <= c_hi) {
                        far_w += cw[c][j - s];
                    }
                }
                row[j] = far_w * self.kern(kind, xi - x[j], inv_w) + local[j - j_lo];
            }
        }
        if let Some(gam) = tails.right {
            row[n - 1] += self.tail_weight(kind, xi, g.r_max, 1.0, gam, w, inv_w);
        }
        if let Some(gam) = tails.left {
            row[0] += self.tail_weight(kind, xi, g.r_max, -1.0, gam, w, inv_w);
        }
    }

    /// ∫_c k(x_i − y) L_k(y) dy on pieces graded toward x_i. With `subtract = Some(m)`
    /// the m-th basis function is replaced by `L_m − 1`.
    #[allow(clippy::too_many_arguments)]
    fn integrate_cell(
        &self,
        kind: KernelKind,
        xi: f64,
        c: usize,
        s: usize,
        w: f64,
        inv_w: f64,
        subtract: Option<usize>,
    ) -> [f64; 4] {
        let x = self.grid.nodes();
        let st = &x[s..s + 4];
        let (a, b) = (x[c], x[c + 1]);
        let mut out = [0.0; 4];
        let from_left = xi <= a;
        let mut d0 = if from_left { a - xi } else { xi - b }; // distance to the near end
        let len = b - a;
        let mut done = 0.0;
        while done < len {
            let scale = d0.max(w);
            let piece = (0.5 * scale).min(len - done);
            let ratio = piece / scale;
            let npts = if ratio <= 0.1 {
                4
            } else if ratio <= 0.25 {
                6
            } else {
                8
            };
            let (u, v) = if from_left { (a + done, a + done + piece) } else { (b - done - piece, b - done) };
            for (y, wt) in gauss(npts).mapped(u, v) {
                let kv = self.kern(kind, xi - y, inv_w) * wt;
                let mut l = lagrange4(st, y);
                if let Some(m) = subtract {
                    l[m] -= 1.0;
                }
                for k in 0..4 {
                    out[k] += kv * l[k];
                }
            }
            done += piece;
            d0 += piece;
            if len - done < 1e-14 * len {
                break;
            }
        }
        out
    }

    /// ∫ over |y| > R on one side of k(x − y) (R/|y|)^γ dy, in the variable u = ln(|y|/R).
    #[allow(clippy::too_many_arguments)]
    fn tail_weight(&self, kind: KernelKind, xi: f64, r: f64, side: f64, gam: f64, w: f64, inv_w: f64) -> f64 {
        let delta = (r - side * xi).max(0.0);
        let u_max = 21.0;
        let mut s0 = 0.5 * delta.max(w) / r;
        let mut u = 0.0;
        let mut total = 0.0;
        let rule = gauss(6);
        while u < u_max {
            let v = (u + s0).min(u_max);
            for (uu, wt) in rule.mapped(u, v) {
                let e = uu.exp();
                let y = side * r * e;
                total += wt * self.kern(kind, xi - y, inv_w) * r * e.powf(1.0 - gam);
            }
            u = v;
            s0 *= 2.0;
        }
        total
    }
}
