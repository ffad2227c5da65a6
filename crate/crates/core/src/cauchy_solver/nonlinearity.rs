use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// Scalar profile `g` of the flux `f(u) = b g(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxForm {
    /// `g(u) = u |u|^{q-1}`
    PowerLaw,
    /// `g(u) = u² / 2` (q = 2)
    Burgers,
}

/// Flux `f(u) = b g(u)` with exponent `q` and direction `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub form: FluxForm,
    pub q: f64,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub q_tilde: f64,
    pub q_star: f64,
}

/// `q̃ = 1 + (α-1)/d` and `q* = 1 + 1/(α+d)`.
pub fn critical_exponents(alpha: f64, d: usize) -> Result<CriticalExponents> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (1,2), got {alpha}"));
    }
    if d < 1 {
        return domain("dimension must be at least 1");
    }
    let d = d as f64;
    Ok(CriticalExponents { q_tilde: 1.0 + (alpha - 1.0) / d, q_star: 1.0 + 1.0 / (alpha + d) })
}

impl NonlinearitySpec {
    pub fn power_law(q: f64, b: Vec<f64>) -> Result<Self> {
        let s = NonlinearitySpec { form: FluxForm::PowerLaw, q, b };
        s.validate()?;
        Ok(s)
    }

    pub fn burgers(b: Vec<f64>) -> Result<Self> {
        let s = NonlinearitySpec { form: FluxForm::Burgers, q: 2.0, b };
        s.validate()?;
        Ok(s)
    }

    /// The critical flux `b u|u|^{(α-1)/d}`.
    pub fn critical(alpha: f64, b: Vec<f64>) -> Result<Self> {
        let d = b.len();
        let c = critical_exponents(alpha, d)?;
        Self::power_law(c.q_tilde, b)
    }

    /// Zero flux (linear equation) in dimension `d`.
    pub fn linear(d: usize) -> Self {
        NonlinearitySpec { form: FluxForm::PowerLaw, q: 2.0, b: vec![0.0; d] }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0 && self.q.is_finite()) {
            return domain(format!("q must exceed 1, got {}", self.q));
        }
        if self.form == FluxForm::Burgers && self.q != 2.0 {
            return domain("the Burgers flux has q = 2");
        }
        if self.b.is_empty() || self.b.len() > 3 || self.b.iter().any(|v| !v.is_finite()) {
            return domain("direction b must have 1 to 3 finite components");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn b_norm(&self) -> f64 {
        self.b.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_linear(&self) -> bool {
        self.b.iter().all(|&v| v == 0.0)
    }

    /// Constant `C` in `|f(u)| ≤ C|u|^q` and in the Lipschitz bound
    /// `|f(u)-f(v)| ≤ C|u-v|(|u|^{q-1}+|v|^{q-1})`: `|b| max(1, 2^{q-1} q)`, halved for Burgers.
    pub fn growth_const(&self) -> f64 {
        let s = match self.form {
            FluxForm::PowerLaw => 1.0,
            FluxForm::Burgers => 0.5,
        };
        s * self.b_norm() * 1f64.max(2f64.powf(self.q - 1.0) * self.q)
    }

    #[inline]
    pub fn g(&self, u: f64) -> f64 {
        match self.form {
            FluxForm::PowerLaw => u * u.abs().powf(self.q - 1.0),
            FluxForm::Burgers => 0.5 * u * u,
        }
    }

    /// `g'(u)`.
    #[inline]
    pub fn dg(&self, u: f64) -> f64 {
        match self.form {
            FluxForm::PowerLaw => self.q * u.abs().powf(self.q - 1.0),
            FluxForm::Burgers => u,
        }
    }

    /// Decay exponent of `g(u)` when `u ~ |x|^{-θ}`.
    pub fn tail_exponent(&self, theta: f64) -> f64 {
        self.q * theta
    }
}
