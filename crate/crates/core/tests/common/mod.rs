//! Independent reference routines shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gamma via upward recurrence and the Stirling series.
pub fn gamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 1.0;
    let mut z = x;
    while z < 20.0 {
        shift *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
    let lg = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series;
    lg.exp() / shift
}

pub fn c0(alpha: f64, d: f64) -> f64 {
    alpha * 2f64.powf(alpha - 1.0) * PI.powf(-(d + 2.0) / 2.0) * (alpha * PI / 2.0).sin() * gamma((alpha + d) / 2.0)
        * gamma(alpha / 2.0)
}

pub fn c1(alpha: f64, d: f64) -> f64 {
    2.0 * PI * alpha * 2f64.powf(alpha - 1.0) * PI.powf(-(d + 4.0) / 2.0) * (alpha * PI / 2.0).sin()
        * gamma((alpha + d + 2.0) / 2.0)
        * gamma(alpha / 2.0)
}

/// (1/pi) Int_0^inf exp(-rho^alpha) cos(rho r) d rho by composite Simpson after rho = u^2.
pub fn profile_d1_simpson(alpha: f64, r: f64) -> f64 {
    let umax = 60f64.powf(1.0 / alpha).sqrt();
    let n = 400_000;
    let h = umax / n as f64;
    let f = |u: f64| {
        let rho = u * u;
        (-rho.powf(alpha)).exp() * (rho * r).cos() * 2.0 * u
    };
    let mut s = f(0.0) + f(umax);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0 / PI
}

/// Derivative of the same integral: -(1/pi) Int rho sin(rho r) exp(-rho^alpha).
pub fn profile_d1_deriv_simpson(alpha: f64, r: f64) -> f64 {
    let umax = 60f64.powf(1.0 / alpha).sqrt();
    let n = 400_000;
    let h = umax / n as f64;
    let f = |u: f64| {
        let rho = u * u;
        -(-rho.powf(alpha)).exp() * rho * (rho * r).sin() * 2.0 * u
    };
    let mut s = f(0.0) + f(umax);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0 / PI
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
