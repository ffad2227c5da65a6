use crate::error::{domain, Result};
use crate::grid::{Field, SpatialGrid};
use crate::linear_semigroup::convolution_table;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Initial data library. Radial in d = 2 (profiles use the line kernel's shape in |x|).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    /// `m P_α(x/ε)/ε`, a narrow kernel of mass m.
    DeltaApprox { mass: f64, width: f64 },
    /// `a P_α(x)`.
    ScaledProfile { amplitude: f64 },
    /// `a exp(1 - 1/(1 - (x/w)²))` on |x| < w.
    Bump { amplitude: f64, width: f64 },
    /// `a (1+|x|)^{-(α+d)}`.
    Algebraic { amplitude: f64 },
}

impl InitialData {
    pub fn sample(&self, grid: &Arc<SpatialGrid>, alpha: f64) -> Result<Field> {
        let d = grid.dim() as f64;
        match *self {
            InitialData::DeltaApprox { mass, width } => {
                if !(width > 0.0) {
                    return domain("delta width must be positive");
                }
                let tab = convolution_table(alpha)?;
                if grid.dim() != 1 {
                    return domain("kernel-shaped data are available in d = 1");
                }
                Field::from_fn(grid.clone(), |x, _| mass * tab.value(x.abs() / width) / width)
            }
            InitialData::ScaledProfile { amplitude } => {
                if grid.dim() != 1 {
                    return domain("kernel-shaped data are available in d = 1");
                }
                let tab = convolution_table(alpha)?;
                Field::from_fn(grid.clone(), |x, _| amplitude * tab.value(x.abs()))
            }
            InitialData::Bump { amplitude, width } => {
                if !(width > 0.0) {
                    return domain("bump width must be positive");
                }
                Field::from_fn(grid.clone(), |x, y| {
                    let s = (x * x + y * y) / (width * width);
                    if s < 1.0 {
                        amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
                    } else {
                        0.0
                    }
                })
            }
            InitialData::Algebraic { amplitude } => {
                Field::from_fn(grid.clone(), |x, y| amplitude * (1.0 + (x * x + y * y).sqrt()).powf(-(alpha + d)))
            }
        }
    }
}
