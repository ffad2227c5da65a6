//! Gamma function wrappers and Bessel functions J0, J1.

use std::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Bessel functions of the first kind of orders 0 and 1, `(J0(z), J1(z))`, for `z >= 0`.
///
/// Ascending series below 8, Miller backward recurrence on [8, 30), Hankel
/// asymptotic series from 30 on. Absolute accuracy is about 1e-14.
pub fn bessel_j01(z: f64) -> (f64, f64) {
    debug_assert!(z >= 0.0);
    if z < 8.0 {
        series_j01(z)
    } else if z < 30.0 {
        miller_j01(z)
    } else {
        hankel_j01(z)
    }
}

fn series_j01(z: f64) -> (f64, f64) {
    let q = -0.25 * z * z;
    let (mut t0, mut t1) = (1.0, 0.5 * z);
    let (mut s0, mut s1) = (t0, t1);
    let mut k = 1.0;
    loop {
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-17 * s0.abs().max(1e-3) && t1.abs() < 1e-17 * s1.abs().max(1e-3) {
            break;
        }
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    (s0, s1)
}

fn miller_j01(z: f64) -> (f64, f64) {
    let mut m = (z as usize) + 40;
    if m % 2 == 1 {
        m += 1;
    }
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    let mut j1 = 0.0;
    let mut n = m;
    while n > 0 {
        let jm1 = 2.0 * n as f64 / z * j - jp1;
        jp1 = j;
        j = jm1;
        n -= 1;
        if n == 1 {
            j1 = j;
        }
        if n % 2 == 0 && n > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j;
    (j / norm, j1 / norm)
}

fn hankel_j01(z: f64) -> (f64, f64) {
    let pq = |nu: f64| -> (f64, f64) {
        let mu = 4.0 * nu * nu;
        let (mut p, mut q) = (1.0, 0.0);
        let mut a = 1.0;
        let mut prev = f64::INFINITY;
        for k in 1..60 {
            let kf = k as f64;
            a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * z);
            if a.abs() > prev || a.abs() < 1e-18 {
                break;
            }
            prev = a.abs();
            match k % 4 {
                1 => q += a,
                2 => p -= a,
                3 => q -= a,
                _ => p += a,
            }
        }
        (p, q)
    };
    let amp = (2.0 / (PI * z)).sqrt();
    let (p0, q0) = pq(0.0);
    let (p1, q1) = pq(1.0);
    let (s, c) = z.sin_cos();
    // cos(z - pi/4) and sin(z - pi/4), cos(z - 3pi/4) and sin(z - 3pi/4)
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (c0, s0) = (r * (c + s), r * (s - c));
    let (c1, s1) = (r * (s - c), -r * (c + s));
    (amp * (p0 * c0 - q0 * s0), amp * (p1 * c1 - q1 * s1))
}
