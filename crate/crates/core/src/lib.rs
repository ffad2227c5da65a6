//! Fractal conservation laws `∂ₜu + (−Δ)^{α/2}u + ∇·f(u) = 0`, `1 < α < 2`:
//! stable heat kernels, linear semigroup, two nonlinear solvers and the
//! far-field asymptotics of their solutions.

pub mod cauchy_solver;
pub mod error;
pub mod farfield;
pub mod grid;
pub mod linear_semigroup;
pub mod quad;
pub mod selfsim;
pub mod special;
pub mod stable_kernel;

pub use error::{Error, Result};
pub use stable_kernel::{
    closed_form_oracle, kernel_constants, KernelConstants, KernelParams, KernelTable, ProfilePoint, RadialProfileTable,
    Regime, StableKernel, TailWhich,
};
pub use grid::{Field, SpatialGrid, StretchedGrid, UniformGrid};
