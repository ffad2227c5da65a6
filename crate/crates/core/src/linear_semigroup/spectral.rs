//! Fourier multipliers on uniform periodic grids.

use crate::grid::UniformGrid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// FFT plans and wave numbers for one uniform grid.
#[derive(Clone)]
pub struct Spectral {
    grid: UniformGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// per-axis angular frequencies
    freqs: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &UniformGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let freqs = (0..grid.n).map(|k| grid.freq(k)).collect();
        Spectral { grid: grid.clone(), fwd, inv, freqs }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        plan.process(data);
        if self.grid.dim == 2 {
            transpose(data, n);
            plan.process(data);
            transpose(data, n);
        }
    }

    /// Forward DFT of real samples.
    pub fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut c, &self.fwd);
        c
    }

    /// Inverse DFT, normalized, real part.
    pub fn inverse(&self, mut c: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut c, &self.inv);
        let s = 1.0 / c.len() as f64;
        c.iter().map(|z| z.re * s).collect()
    }

    /// Wave vector of flat mode index `m`.
    #[inline]
    pub fn wave(&self, m: usize) -> [f64; 2] {
        let n = self.grid.n;
        if self.grid.dim == 1 {
            [self.freqs[m], 0.0]
        } else {
            [self.freqs[m / n], self.freqs[m % n]]
        }
    }

    /// |ξ| of flat mode index `m`.
    #[inline]
    pub fn abs_wave(&self, m: usize) -> f64 {
        let k = self.wave(m);
        (k[0] * k[0] + k[1] * k[1]).sqrt()
    }

    /// True when the mode survives 2/3-rule dealiasing.
    #[inline]
    pub fn keeps(&self, m: usize) -> bool {
        let n = self.grid.n;
        let cut = |k: usize| {
            let kk = if k < n / 2 { k } else { n - k };
            3 * kk < n
        };
        if self.grid.dim == 1 {
            cut(m)
        } else {
            cut(m / n) && cut(m % n)
        }
    }

    /// Multiplies the spectrum by `mult(ξ)`.
    pub fn apply(&self, v: &[f64], mult: impl Fn([f64; 2]) -> Complex64) -> Vec<f64> {
        let mut c = self.forward(v);
        for (m, z) in c.iter_mut().enumerate() {
            *z *= mult(self.wave(m));
        }
        self.inverse(c)
    }

    /// exp(-t |ξ|^α) multiplier.
    pub fn heat(&self, v: &[f64], alpha: f64, t: f64) -> Vec<f64> {
        self.apply(v, |k| {
            let a = (k[0] * k[0] + k[1] * k[1]).sqrt();
            Complex64::new((-t * a.powf(alpha)).exp(), 0.0)
        })
    }

    /// Partial derivative along `axis`.
    pub fn derivative(&self, v: &[f64], axis: usize) -> Vec<f64> {
        let n = self.grid.n;
        self.apply(v, |k| {
            // the Nyquist mode has no consistent real derivative
            let nyq = std::f64::consts::PI * (n / 2) as f64 / self.grid.half_width;
            if (k[axis].abs() - nyq).abs() < 1e-9 * nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k[axis])
            }
        })
    }
}

impl Spectral {
    /// Trigonometric interpolant of 1-D periodic samples at arbitrary points.
    pub fn interpolate(&self, v: &[f64], xs: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let c = self.forward(v);
        let x0 = -self.grid.half_width;
        xs.iter()
            .map(|&x| {
                let mut s = 0.0;
                for (k, z) in c.iter().enumerate() {
                    let ph = self.freqs[k] * (x - x0);
                    if k == n / 2 {
                        s += z.re * ph.cos();
                    } else {
                        s += z.re * ph.cos() - z.im * ph.sin();
                    }
                }
                s / n as f64
            })
            .collect()
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
