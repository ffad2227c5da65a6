//! Far-field expansion of solutions,
//! `u(x,t) = S(t)u0(x) + c₁ x|x|^{-(α+d+2)} · M_f(t) + R(x,t)`,
//! with `M_f(t) = ∫₀ᵗ∫(t−s) f(u(y,s)) dy ds`: the mass moment, the
//! predicted remainder orders, and regression-based verification.

mod fit;

pub use fit::{fit_tail_exponent, linear_fit, projected_window, regress, LinearFit, Parity, TailFit};

use crate::cauchy_solver::{critical_exponents, NonlinearitySpec, Trajectory};
use crate::error::{domain, Error, Result};
use crate::grid::Field;
use crate::linear_semigroup::{convolution_table, KernelKind, StretchedConvolver, TailModel};
use crate::stable_kernel::{kernel_constants, KernelParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassMoment {
    pub t: f64,
    /// one entry per component of b
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeRule {
    Trapezoid,
    /// composite Simpson; needs an even number of equal intervals
    Simpson,
}

/// Minimum snapshot count in `[0, t]` for [`mass_moment`].
pub const MIN_SNAPSHOTS: usize = 20;

/// `M_f(t)` by the trapezoid rule in time over the snapshots in `[0, t]`,
/// and the grid quadrature (tail included on stretched grids) in space.
pub fn mass_moment(traj: &Trajectory, f: &NonlinearitySpec, t: f64) -> Result<MassMoment> {
    mass_moment_with(traj, f, t, TimeRule::Trapezoid)
}

pub fn mass_moment_with(traj: &Trajectory, f: &NonlinearitySpec, t: f64, rule: TimeRule) -> Result<MassMoment> {
    traj.check()?;
    let snaps: Vec<&Field> = traj.snapshots.iter().filter(|s| s.time <= t * (1.0 + 1e-12)).collect();
    let last = snaps.last().map(|s| s.time).unwrap_or(-1.0);
    if (last - t).abs() > 1e-12 * t.max(1.0) {
        return domain(format!("time {t} is not a snapshot of the trajectory"));
    }
    if snaps.len() < MIN_SNAPSHOTS {
        return domain(format!("{} snapshots in [0, {t}]; need at least {MIN_SNAPSHOTS}", snaps.len()));
    }
    if snaps[0].time != 0.0 {
        return domain("trajectory must start at t = 0");
    }
    // s ↦ (t − s) ∫ g(u(y, s)) dy
    let vals: Vec<f64> = snaps
        .iter()
        .map(|s| (t - s.time) * s.with_values(s.values.iter().map(|&u| f.g(u)).collect()).integral())
        .collect();
    let times: Vec<f64> = snaps.iter().map(|s| s.time).collect();
    let integral = match rule {
        TimeRule::Trapezoid => times.windows(2).zip(vals.windows(2)).map(|(tt, v)| 0.5 * (tt[1] - tt[0]) * (v[0] + v[1])).sum(),
        TimeRule::Simpson => {
            let n = times.len() - 1;
            let h = times[1] - times[0];
            if n % 2 != 0 || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
                return domain("Simpson's rule needs an even number of equal time intervals");
            }
            let mut s = vals[0] + vals[n];
            for (i, v) in vals.iter().enumerate().take(n).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0
        }
    };
    Ok(MassMoment { t, value: f.b.iter().map(|b| b * integral).collect() })
}

/// `S(t)u0`, the second-order term `c₁ x M_f(t)/|x|^{α+3}` and their sum on the grid of `u0` (d = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub linear: Field,
    pub second: Field,
    pub total: Field,
    pub c1: f64,
    pub mass_moment: MassMoment,
}

/// Two-term prediction at time `t` on the stretched grid of `u0`.
pub fn expansion_prediction(u0: &Field, traj: &Trajectory, alpha: f64, f: &NonlinearitySpec, t: f64) -> Result<Prediction> {
    let g = u0
        .grid
        .as_stretched()
        .ok_or_else(|| Error::GridMismatch("far-field predictions need the stretched free-space grid".into()))?;
    let mf = mass_moment(traj, f, t)?;
    let table = convolution_table(alpha)?;
    let lin = StretchedConvolver::new(g, &table).apply(KernelKind::Value, t, TailModel::fitted(g, &u0.values), &u0.values);
    let linear = Field::new(u0.grid.clone(), lin, t)?;
    let c1 = kernel_constants(&KernelParams::new(alpha, 1)?)?.c1;
    let m = mf.value[0];
    let sec: Vec<f64> = g.nodes().iter().map(|&x| if x == 0.0 { 0.0 } else { c1 * m * second_order_shape(x, alpha) }).collect();
    let second = Field::new(u0.grid.clone(), sec, t)?;
    let total = linear.with_values(linear.values.iter().zip(&second.values).map(|(a, b)| a + b).collect());
    Ok(Prediction { linear, second, total, c1, mass_moment: mf })
}

/// `x |x|^{-(α+3)}` (d = 1).
#[inline]
pub fn second_order_shape(x: f64, alpha: f64) -> f64 {
    x * x.abs().powf(-(alpha + 3.0))
}

/// `R(x,t) = u(x,t) − prediction`.
pub fn remainder_field(traj: &Trajectory, u0: &Field, alpha: f64, f: &NonlinearitySpec, t: f64) -> Result<Field> {
    let pred = expansion_prediction(u0, traj, alpha, f, t)?;
    let u = traj.at(t).ok_or_else(|| Error::Domain(format!("no snapshot at t = {t}")))?;
    u.same_grid(&pred.total)?;
    Ok(u.with_values(u.values.iter().zip(&pred.total.values).map(|(a, b)| a - b).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemainderVariant {
    I,
    Ii,
    SelfsimD1,
    SelfsimDge2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeMode {
    FixedT,
    UniformN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderOrder {
    /// the remainder is O(|x|^{-exponent})
    pub exponent: f64,
    /// uniform-in-time mode: bound `N ≤ 3` on the growth `(1+t)^N` of the constant
    pub n_bound: Option<f64>,
}

/// Decay order of the far-field remainder.
pub fn predicted_remainder_order(alpha: f64, d: usize, q: f64, variant: RemainderVariant, mode: TimeMode) -> Result<RemainderOrder> {
    let crit = critical_exponents(alpha, d)?;
    if !(q > 1.0) {
        return domain(format!("q must exceed 1, got {q}"));
    }
    let dd = d as f64;
    let ad = alpha + dd;
    let exponent = match variant {
        RemainderVariant::I => (q * ad).min(ad + 2.0),
        RemainderVariant::Ii => (q * ad + 1.0).min(ad + 2.0),
        RemainderVariant::SelfsimD1 | RemainderVariant::SelfsimDge2 => {
            if (q - crit.q_tilde).abs() > 1e-9 {
                return domain(format!("self-similar orders need q = q̃ = {}, got {q}", crit.q_tilde));
            }
            if crit.q_tilde <= crit.q_star {
                return domain("outside Remark hypotheses (requires q̃ > q*)");
            }
            match variant {
                RemainderVariant::SelfsimD1 => {
                    if d != 1 {
                        return domain("selfsim-d1 needs d = 1");
                    }
                    if alpha <= 3f64.sqrt() {
                        alpha * (alpha + 1.0)
                    } else {
                        alpha + 3.0
                    }
                }
                _ => {
                    if d < 2 {
                        return domain("selfsim-dge2 needs d ≥ 2");
                    }
                    crit.q_tilde * ad
                }
            }
        }
    };
    let n_bound = match mode {
        TimeMode::FixedT => None,
        TimeMode::UniformN => Some(3.0),
    };
    Ok(RemainderOrder { exponent, n_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionRegime {
    PartI,
    PartIi,
    Selfsimilar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub t: f64,
    #[serde(skip)]
    pub linear_part: Option<Field>,
    pub second_order_coeff_predicted: f64,
    pub second_order_coeff_fitted: f64,
    pub coeff_std_error: f64,
    pub remainder_exponent_predicted: f64,
    pub remainder_fit: Option<TailFit>,
    pub regime: ExpansionRegime,
    /// sign of the odd part of u − S(t)u0 far out agrees with sign(b c₁ M_f)
    pub sign_agrees: bool,
    pub window: [f64; 2],
}

/// Fits `A` in `odd(w) ≈ A x|x|^{-(α+3)}` over the window by least squares in
/// relative residual (the mean of the pointwise ratios). Returns `(A, std error,
/// sign of odd(w) at the outer end)`.
pub fn fit_second_order(w: &Field, alpha: f64, window: [f64; 2]) -> Result<(f64, f64, f64)> {
    let pts = projected_window(w, window, Parity::OddPart);
    if pts.len() < 8 {
        return Err(Error::Fit(format!("only {} nodes in window", pts.len())));
    }
    let ratios: Vec<f64> = pts.iter().map(|&(x, y)| y / second_order_shape(x, alpha)).collect();
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let far_sign = pts.last().map(|p| p.1.signum()).unwrap_or(0.0);
    Ok((mean, (var / n).sqrt(), far_sign))
}

/// Expansion check at time `t`: second-order coefficient against `c₁ M_f(t)` and
/// the remainder decay against the predicted order. Fails on a contaminated window.
pub fn verify_expansion(
    u0: &Field,
    traj: &Trajectory,
    alpha: f64,
    f: &NonlinearitySpec,
    t: f64,
    window: [f64; 2],
    variant: RemainderVariant,
) -> Result<ExpansionReport> {
    let pred = expansion_prediction(u0, traj, alpha, f, t)?;
    let u = traj.at(t).ok_or_else(|| Error::Domain(format!("no snapshot at t = {t}")))?;
    let w = u.with_values(u.values.iter().zip(&pred.linear.values).map(|(a, b)| a - b).collect());
    let (coeff, se, far_sign) = fit_second_order(&w, alpha, window)?;
    let predicted = pred.c1 * pred.mass_moment.value[0];
    let rem = w.with_values(w.values.iter().zip(&pred.second.values).map(|(a, b)| a - b).collect());
    let remainder_fit = if f.is_linear() { None } else { Some(fit_tail_exponent(&rem, window, Parity::Envelope)?) };
    // the estimate is relative to the local signal
    if let Some(fit) = &remainder_fit {
        if fit.contamination_estimate > 0.05 {
            return Err(Error::Fit(format!("window too contaminated ({:.3e} of the signal)", fit.contamination_estimate)));
        }
    }
    let order = predicted_remainder_order(alpha, 1, f.q, variant, TimeMode::FixedT)?;
    Ok(ExpansionReport {
        t,
        linear_part: Some(pred.linear),
        second_order_coeff_predicted: predicted,
        second_order_coeff_fitted: coeff,
        coeff_std_error: se,
        remainder_exponent_predicted: order.exponent,
        remainder_fit,
        regime: match variant {
            RemainderVariant::I => ExpansionRegime::PartI,
            RemainderVariant::Ii => ExpansionRegime::PartIi,
            _ => ExpansionRegime::Selfsimilar,
        },
        sign_agrees: predicted != 0.0 && far_sign == predicted.signum(),
        window,
    })
}

/// `E(t) = sup_window |R(x,t)| |x|^{order}` at several times, and the fitted
/// growth exponent `N` of `E ∝ (1+t)^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub times: Vec<f64>,
    pub envelope: Vec<f64>,
    pub order: f64,
    pub fitted_n: f64,
    /// max over t of `E(t)/E(t₀) / ((1+t)/(1+t₀))³`
    pub worst_cubic_ratio: f64,
}

pub fn remainder_envelope(
    u0: &Field,
    traj: &Trajectory,
    alpha: f64,
    f: &NonlinearitySpec,
    times: &[f64],
    window: [f64; 2],
    order: f64,
) -> Result<EnvelopeReport> {
    if times.len() < 2 {
        return domain("need at least two times");
    }
    let mut env = Vec::new();
    for &t in times {
        let r = remainder_field(traj, u0, alpha, f, t)?;
        let e = projected_window(&r, window, Parity::Envelope).iter().map(|&(x, y)| y.abs() * x.powf(order)).fold(0.0, f64::max);
        env.push(e);
    }
    let xs: Vec<f64> = times.iter().map(|t| (1.0 + t).ln()).collect();
    let ys: Vec<f64> = env.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let (n, _) = linear_fit(&xs, &ys);
    let worst = times
        .iter()
        .zip(&env)
        .map(|(t, e)| (e / env[0]) / ((1.0 + t) / (1.0 + times[0])).powi(3))
        .fold(0.0, f64::max);
    Ok(EnvelopeReport { times: times.to_vec(), envelope: env, order, fitted_n: n, worst_cubic_ratio: worst })
}
