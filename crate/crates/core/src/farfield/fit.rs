use crate::error::{Error, Result};
use crate::grid::Field;
use serde::{Deserialize, Serialize};

/// Ordinary least squares `y ≈ slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub intercept_std_error: f64,
}

pub fn regress(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let s2 = if n > 2.0 { rss / (n - 2.0) } else { 0.0 };
    LinearFit {
        slope,
        intercept,
        slope_std_error: (s2 / sxx).sqrt(),
        intercept_std_error: (s2 * (1.0 / n + mx * mx / sxx)).sqrt(),
    }
}

/// `(slope, intercept)` of the least-squares line.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let f = regress(xs, ys);
    (f.slope, f.intercept)
}

/// Which projection of the field to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    EvenPart,
    OddPart,
    /// |v| on the positive half-line; errors on sign changes
    Abs,
    /// `sqrt((v(x)² + v(−x)²)/2)`, insensitive to parity mixing
    Envelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub window: [f64; 2],
    pub max_rel_residual: f64,
    pub contamination_estimate: f64,
    pub exponent_std_error: f64,
    pub nodes: usize,
}

/// Samples `(x, projected value)` for nodes with `r_lo ≤ x ≤ r_hi`, x > 0.
pub fn projected_window(v: &Field, window: [f64; 2], parity: Parity) -> Vec<(f64, f64)> {
    let g = &v.grid;
    let mut out = Vec::new();
    for i in 0..g.len() {
        let p = g.point(i);
        if p[1] != 0.0 || !(p[0] >= window[0] && p[0] <= window[1]) || p[0] <= 0.0 {
            continue;
        }
        let a = v.values[i];
        let b = v.values[g.mirror(i)];
        let y = match parity {
            Parity::EvenPart => 0.5 * (a + b),
            Parity::OddPart => 0.5 * (a - b),
            Parity::Abs => a,
            Parity::Envelope => (0.5 * (a * a + b * b)).sqrt(),
        };
        out.push((p[0], y));
    }
    out
}

/// Log–log regression of the projected field over the window: `|v| ≈ A x^{exponent}`.
pub fn fit_tail_exponent(v: &Field, window: [f64; 2], parity: Parity) -> Result<TailFit> {
    if !(window[0] > 0.0 && window[0] < window[1]) {
        return Err(Error::Fit(format!("window [{}, {}] must satisfy 0 < r_lo < r_hi", window[0], window[1])));
    }
    let pts = projected_window(v, window, parity);
    if pts.len() < 8 {
        return Err(Error::Fit(format!("only {} nodes in window [{}, {}]; need 8", pts.len(), window[0], window[1])));
    }
    if pts.iter().any(|p| p.1 == 0.0 || !p.1.is_finite()) {
        return Err(Error::Fit("projected field vanishes inside the window".into()));
    }
    let s0 = pts[0].1.signum();
    if pts.iter().any(|p| p.1.signum() != s0) {
        let advice = match parity {
            Parity::Abs => "use the even-part, odd-part or envelope projection",
            _ => "the projected field is not of one sign; narrow the window",
        };
        return Err(Error::Fit(format!("sign change inside the window: {advice}")));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.abs().ln()).collect();
    let f = regress(&xs, &ys);
    let coefficient = f.intercept.exp();
    let max_rel_residual = pts
        .iter()
        .map(|&(x, y)| (coefficient * x.powf(f.slope) - y.abs()).abs() / y.abs())
        .fold(0.0, f64::max);
    Ok(TailFit {
        exponent: f.slope,
        coefficient,
        window,
        max_rel_residual,
        contamination_estimate: v.grid.contamination(window[1], -f.slope),
        exponent_std_error: f.slope_std_error,
        nodes: pts.len(),
    })
}
