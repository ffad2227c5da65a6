//! Spatial grids and sampled fields.
//!
//! Two backends: a uniform periodic grid on `[-L, L)^d` (d = 1, 2) for the
//! spectral path, and a symmetric stretched free-space grid on `[-R_max, R_max]`
//! (d = 1) whose spacing grows geometrically outside a uniform core. Functions
//! on the stretched grid are represented by their piecewise cubic Lagrange
//! interpolant, and integrals use the weights of that interpolant.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Uniform periodic grid with `n` points per axis and nodes `-L + j h`, `h = 2L/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
}

impl UniformGrid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return domain(format!("uniform grids support d = 1, 2, got {dim}"));
        }
        if n < 4 || !n.is_power_of_two() {
            return domain(format!("point count {n} must be a power of two >= 4"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return domain(format!("half-width {half_width} must be positive"));
        }
        Ok(UniformGrid { dim, n, half_width })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.h()
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Angular frequency of FFT index `k`.
    pub fn freq(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let kk = if (k as i64) < n / 2 { k as i64 } else { k as i64 - n };
        std::f64::consts::PI * kk as f64 / self.half_width
    }
}

/// Symmetric free-space grid: uniform spacing `h0` on `[-core, core]`, then
/// spacing growing by `ratio` per cell out to `r_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StretchedGrid {
    pub h0: f64,
    pub ratio: f64,
    pub core: f64,
    pub r_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// per-cell integrals of the four Lagrange basis functions
    cell_weights: Vec<[f64; 4]>,
}

impl PartialEq for StretchedGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

impl StretchedGrid {
    pub fn new(h0: f64, ratio: f64, core: f64, r_max: f64) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return domain(format!("inner spacing h0 = {h0} must be positive"));
        }
        if !(ratio > 1.0 && ratio <= 1.1) {
            return domain(format!("stretching ratio {ratio} not in (1, 1.1]"));
        }
        if !(r_max >= 1e3 && r_max.is_finite()) {
            return domain(format!("outer radius {r_max} must be at least 1e3"));
        }
        if !(core >= 0.0 && core < r_max) {
            return domain(format!("core half-width {core} must lie in [0, r_max)"));
        }
        let mut half = vec![0.0];
        let mut x = 0.0;
        while x + h0 <= core + 1e-9 * h0 {
            x += h0;
            half.push(x);
        }
        let mut h = h0;
        loop {
            h *= ratio;
            if x + h >= r_max {
                if r_max - x < 0.5 * h {
                    *half.last_mut().unwrap() = r_max;
                } else {
                    half.push(r_max);
                }
                break;
            }
            x += h;
            half.push(x);
        }
        let mut nodes: Vec<f64> = half.iter().skip(1).rev().map(|v| -v).collect();
        nodes.extend_from_slice(&half);
        let n = nodes.len();
        let mut cell_weights = Vec::with_capacity(n - 1);
        let mut weights = vec![0.0; n];
        let g = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
        for c in 0..n - 1 {
            let s = Self::stencil_start_n(c, n);
            let (a, b) = (nodes[c], nodes[c + 1]);
            let mut q = [0.0; 4];
            for &t in &g {
                let y = a + t * (b - a);
                let l = lagrange4(&nodes[s..s + 4], y);
                for k in 0..4 {
                    q[k] += 0.5 * (b - a) * l[k];
                }
            }
            for k in 0..4 {
                weights[s + k] += q[k];
            }
            cell_weights.push(q);
        }
        Ok(StretchedGrid { h0, ratio, core, r_max, nodes, weights, cell_weights })
    }

    fn stencil_start_n(c: usize, n: usize) -> usize {
        c.saturating_sub(1).min(n - 4)
    }

    /// First node of the 4-point interpolation stencil of cell `c = [x_c, x_{c+1}]`.
    #[inline]
    pub fn stencil_start(&self, c: usize) -> usize {
        Self::stencil_start_n(c, self.nodes.len())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights of the cubic interpolant.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_weights(&self) -> &[[f64; 4]] {
        &self.cell_weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Index of the mirror node `-x_i`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.nodes.len() - 1 - i
    }

    /// Cell containing `x` (clamped to the grid).
    pub fn cell_of(&self, x: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Cubic interpolation inside the grid; outside, the power-law tail fitted to the last nodes.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let n = self.nodes.len();
        if x.abs() <= self.r_max {
            let c = self.cell_of(x);
            let s = self.stencil_start(c);
            let l = lagrange4(&self.nodes[s..s + 4], x);
            return (0..4).map(|k| l[k] * values[s + k]).sum();
        }
        let (i0, i1) = if x > 0.0 { (n - 2, n - 1) } else { (1, 0) };
        match tail_law(self.nodes[i0].abs(), values[i0], self.nodes[i1].abs(), values[i1]) {
            Some((_, g)) => values[i1] * (self.r_max / x.abs()).powf(g),
            None => 0.0,
        }
    }
}

/// Power law `v ~ A r^{-g}` through two samples of the same sign, if it decays with g > 1.
pub fn tail_law(r0: f64, v0: f64, r1: f64, v1: f64) -> Option<(f64, f64)> {
    if !(v0 * v1 > 0.0) || r1 <= r0 {
        return None;
    }
    let g = -(v1.abs() / v0.abs()).ln() / (r1 / r0).ln();
    if g > 1.05 && g.is_finite() {
        Some((v1 * r1.powf(g), g))
    } else {
        None
    }
}

/// Values of the four Lagrange basis polynomials on `nodes` at `y`.
#[inline]
pub fn lagrange4(nodes: &[f64], y: f64) -> [f64; 4] {
    let (a, b, c, d) = (nodes[0], nodes[1], nodes[2], nodes[3]);
    let (ya, yb, yc, yd) = (y - a, y - b, y - c, y - d);
    [
        yb * yc * yd / ((a - b) * (a - c) * (a - d)),
        ya * yc * yd / ((b - a) * (b - c) * (b - d)),
        ya * yb * yd / ((c - a) * (c - b) * (c - d)),
        ya * yb * yc / ((d - a) * (d - b) * (d - c)),
    ]
}

/// Derivatives of the four Lagrange basis polynomials at `y`.
pub fn lagrange4_deriv(nodes: &[f64], y: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for k in 0..4 {
        let mut den = 1.0;
        for m in 0..4 {
            if m != k {
                den *= nodes[k] - nodes[m];
            }
        }
        let mut s = 0.0;
        for m in 0..4 {
            if m == k {
                continue;
            }
            let mut p = 1.0;
            for l in 0..4 {
                if l != k && l != m {
                    p *= y - nodes[l];
                }
            }
            s += p;
        }
        out[k] = s / den;
    }
    out
}

/// Either grid backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SpatialGrid {
    #[serde(rename = "uniform-periodic")]
    Uniform(UniformGrid),
    #[serde(rename = "stretched-freespace")]
    Stretched(StretchedGrid),
}

impl SpatialGrid {
    pub fn uniform(dim: usize, n: usize, half_width: f64) -> Result<Arc<Self>> {
        Ok(Arc::new(SpatialGrid::Uniform(UniformGrid::new(dim, n, half_width)?)))
    }

    pub fn stretched(h0: f64, ratio: f64, core: f64, r_max: f64) -> Result<Arc<Self>> {
        Ok(Arc::new(SpatialGrid::Stretched(StretchedGrid::new(h0, ratio, core, r_max)?)))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SpatialGrid::Uniform(_) => "uniform-periodic",
            SpatialGrid::Stretched(_) => "stretched-freespace",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpatialGrid::Uniform(g) => g.dim,
            SpatialGrid::Stretched(_) => 1,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SpatialGrid::Uniform(g) => g.len(),
            SpatialGrid::Stretched(g) => g.len(),
        }
    }

    /// Coordinates of node `i` (second entry zero in 1-d).
    pub fn point(&self, i: usize) -> [f64; 2] {
        match self {
            SpatialGrid::Uniform(g) if g.dim == 1 => [g.coord(i), 0.0],
            SpatialGrid::Uniform(g) => [g.coord(i / g.n), g.coord(i % g.n)],
            SpatialGrid::Stretched(g) => [g.nodes[i], 0.0],
        }
    }

    pub fn radius(&self, i: usize) -> f64 {
        let p = self.point(i);
        (p[0] * p[0] + p[1] * p[1]).sqrt()
    }

    /// Signed first coordinate of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.point(i)[0]
    }

    /// Index of the node at `-x`.
    pub fn mirror(&self, i: usize) -> usize {
        match self {
            SpatialGrid::Uniform(g) if g.dim == 1 => (g.n - i) % g.n,
            SpatialGrid::Uniform(g) => {
                let (a, b) = (i / g.n, i % g.n);
                ((g.n - a) % g.n) * g.n + (g.n - b) % g.n
            }
            SpatialGrid::Stretched(g) => g.mirror(i),
        }
    }

    /// Quadrature weights; on stretched grids those of the cubic interpolant.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            SpatialGrid::Uniform(g) => vec![g.h().powi(g.dim as i32); g.len()],
            SpatialGrid::Stretched(g) => g.weights.clone(),
        }
    }

    pub fn as_uniform(&self) -> Option<&UniformGrid> {
        match self {
            SpatialGrid::Uniform(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_stretched(&self) -> Option<&StretchedGrid> {
        match self {
            SpatialGrid::Stretched(g) => Some(g),
            _ => None,
        }
    }

    /// Radius beyond which far-field measurements are not trusted:
    /// L/4 on periodic grids (image control), R_max on stretched grids.
    pub fn trusted_radius(&self) -> f64 {
        match self {
            SpatialGrid::Uniform(g) => 0.25 * g.half_width,
            SpatialGrid::Stretched(g) => g.r_max,
        }
    }

    /// Relative periodic-image contamination of a `|x|^{-theta}` tail at radius `x`.
    pub fn contamination(&self, x: f64, theta: f64) -> f64 {
        match self {
            SpatialGrid::Uniform(g) => (x / (2.0 * g.half_width - x)).powf(theta),
            SpatialGrid::Stretched(g) => (x / g.r_max).powf(theta) * 1e-3,
        }
    }
}

/// Samples of a scalar function on a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Arc<SpatialGrid>,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("non-finite value at node {i}"));
        }
        if !(time >= 0.0) {
            return domain(format!("time stamp {time} must be nonnegative"));
        }
        Ok(Field { grid, values, time })
    }

    pub fn zeros(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.len();
        Field { grid, values: vec![0.0; n], time: 0.0 }
    }

    /// Samples `f(x, y)` (y = 0 in 1-d).
    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                f(p[0], p[1])
            })
            .collect();
        Field::new(grid, values, 0.0)
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Field { grid: self.grid.clone(), values, time: self.time }
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids".into()))
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.with_values(self.values.iter().map(|v| s * v).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Far-field mass beyond the last node on each side, from the fitted power-law tail.
    pub fn tail_mass(&self) -> f64 {
        let g = match self.grid.as_ref() {
            SpatialGrid::Stretched(g) => g,
            _ => return 0.0,
        };
        let n = g.len();
        let v = &self.values;
        let x = g.nodes();
        let side = |i0: usize, i1: usize| match tail_law(x[i0].abs(), v[i0], x[i1].abs(), v[i1]) {
            Some((_, gam)) => v[i1] * g.r_max / (gam - 1.0),
            None => 0.0,
        };
        side(n - 2, n - 1) + side(1, 0)
    }

    /// Integral of the field, including the tail correction on stretched grids.
    pub fn integral(&self) -> f64 {
        let w = self.grid.weights();
        let s: f64 = w.iter().zip(&self.values).map(|(a, b)| a * b).sum();
        s + self.tail_mass()
    }

    /// L^p norm (p = inf for the sup norm) by the grid quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let w = self.grid.weights();
        let s: f64 = w.iter().zip(&self.values).map(|(a, b)| a * b.abs().powf(p)).sum();
        s.max(0.0).powf(1.0 / p)
    }

    /// Even and odd parts under x -> -x.
    pub fn parity_parts(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.values.len();
        let mut even = vec![0.0; n];
        let mut odd = vec![0.0; n];
        for i in 0..n {
            let m = self.grid.mirror(i);
            even[i] = 0.5 * (self.values[i] + self.values[m]);
            odd[i] = 0.5 * (self.values[i] - self.values[m]);
        }
        (even, odd)
    }
}
