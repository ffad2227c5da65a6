//! Midrange representations: oscillatory Fourier/Bessel integrals and the
//! non-oscillatory fallbacks used when cancellation ruins them (alpha near 2).

use super::series::Eval3;
use crate::quad::adaptive;
use crate::special::{bessel_j01, gamma};
use std::f64::consts::{FRAC_PI_2, PI};

const MAX_PANELS: usize = 20_000;

fn abs_tols<const K: usize>(
    f: &mut impl FnMut(f64) -> [f64; K],
    breaks: &[f64],
    rel: f64,
    floors: impl Fn(f64) -> [f64; K],
) -> [f64; K] {
    // one cheap pass over the initial panels to fix absolute targets
    let mut est = [0.0; K];
    for w in breaks.windows(2) {
        let (v, _) = crate::quad::gk21(f, w[0], w[1]);
        for m in 0..K {
            est[m] += v[m];
        }
    }
    let fl = floors(est[0].abs());
    let mut tol = [0.0; K];
    for m in 0..K {
        tol[m] = rel * est[m].abs().max(fl[m]).max(1e-300);
    }
    tol
}

/// Breaks for `exp(-rho^alpha) * osc(rho r)`, graded toward 0 and split every half period.
fn oscillatory_breaks(r: f64, rho_max: f64) -> Vec<f64> {
    let step = if r > 0.0 { (PI / r).min(1.0) } else { 1.0 };
    let first = step.min(0.5);
    let mut b = vec![0.0];
    for j in (1..=40).rev() {
        b.push(first * 0.5f64.powi(j));
    }
    b.push(first);
    let mut x = first;
    while x < rho_max {
        x = (x + step).min(rho_max);
        b.push(x);
    }
    b
}

fn rho_cut(alpha: f64, r: f64) -> f64 {
    (60.0 + (1.0 + r).ln() * 8.0).powf(1.0 / alpha)
}

/// d = 1 cosine transform and its analytic r-derivatives.
pub(crate) fn fourier_d1(alpha: f64, r: f64, tol: f64) -> Eval3 {
    let mut f = |rho: f64| {
        let e = (-rho.powf(alpha)).exp();
        let (s, c) = (rho * r).sin_cos();
        [e * c, e * rho * s, e * rho * rho * c]
    };
    let breaks = oscillatory_breaks(r, rho_cut(alpha, r));
    let g = 1.0 + r;
    let at = abs_tols(&mut f, &breaks, 0.01 * tol, |p| [p, p / g, p / (g * g)]);
    let q = adaptive(&mut f, &breaks, at, MAX_PANELS);
    let canc = 1e-15 * gamma(1.0 / alpha) / alpha + 1e-16 * q.evaluations as f64 * 1e-3;
    Eval3 {
        p: q.value[0] / PI,
        dp: -q.value[1] / PI,
        d2p: -q.value[2] / PI,
        err: (q.error[0] + canc) / PI,
    }
}

/// d = 2 Hankel transform with J0 and J1 weights.
pub(crate) fn bessel_d2(alpha: f64, r: f64, tol: f64) -> Eval3 {
    let mut f = |rho: f64| {
        let e = (-rho.powf(alpha)).exp();
        let (j0, j1) = bessel_j01(rho * r);
        [e * rho * j0, e * rho * rho * j1, e * rho * rho * rho * j0]
    };
    let breaks = oscillatory_breaks(r, rho_cut(alpha, r));
    let g = 1.0 + r;
    let at = abs_tols(&mut f, &breaks, 0.01 * tol, |p| [p, p / g, p / (g * g)]);
    let q = adaptive(&mut f, &breaks, at, MAX_PANELS);
    let canc = 1e-15 * gamma(2.0 / alpha) / alpha;
    let tp = 2.0 * PI;
    let d2p = if r > 0.0 {
        (-q.value[2] + q.value[1] / r) / tp
    } else {
        -q.value[2] / (2.0 * tp)
    };
    Eval3 {
        p: q.value[0] / tp,
        dp: -q.value[1] / tp,
        d2p,
        err: (q.error[0] + canc) / tp,
    }
}

/// Zolotarev's integral representation of the symmetric stable density on the line,
/// valid for 1 < alpha <= 2 and x > 0. The integrand is positive.
pub(crate) fn zolotarev_d1(alpha: f64, x: f64, tol: f64) -> Eval3 {
    let am1 = alpha - 1.0;
    let gam = alpha / am1;
    let e = 1.0 / am1;
    let c = x.powf(gam);
    // in phi = pi/2 - theta every factor is a sine of a sum of nonnegative angles,
    // which keeps V accurate where the integrand peaks (phi -> 0 as alpha -> 2)
    let s0 = (2.0 - alpha) * FRAC_PI_2;
    let v = |ph: f64| -> f64 {
        let sp = ph.sin();
        let base = sp / (s0 + alpha * ph).sin();
        base.powf(gam) * (s0 + am1 * ph).sin() / sp
    };
    let mut f = |ph: f64| {
        if ph <= 0.0 || ph >= FRAC_PI_2 {
            return [0.0; 3];
        }
        let vv = v(ph);
        let w = (-c * vv).exp();
        if w == 0.0 || !vv.is_finite() {
            return [0.0; 3];
        }
        [vv * w, vv * vv * w, vv * vv * vv * w]
    };
    // the integrand vanishes as phi -> pi/2; only phi -> 0 needs deep grading
    let mut breaks = vec![0.0, FRAC_PI_2];
    for j in 1..=34 {
        let h = FRAC_PI_2 * 0.5f64.powi(j);
        breaks.push(h);
        if j <= 8 {
            breaks.push(FRAC_PI_2 - h);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let at = abs_tols(&mut f, &breaks, 1e-2 * tol, |_| [0.0; 3]);
    let q = adaptive(&mut f, &breaks, at, MAX_PANELS);
    let [i1, i2, i3] = q.value;
    let k = alpha / (PI * am1);
    let xe = x.powf(e);
    let di1 = -gam * x.powf(gam - 1.0) * i2;
    let d2i1 = -gam * (gam - 1.0) * x.powf(gam - 2.0) * i2 + gam * gam * x.powf(2.0 * gam - 2.0) * i3;
    let p = k * xe * i1;
    let dp = k * (e * x.powf(e - 1.0) * i1 + xe * di1);
    let d2p = k * (e * (e - 1.0) * x.powf(e - 2.0) * i1 + 2.0 * e * x.powf(e - 1.0) * di1 + xe * d2i1);
    let rel_err = q.error[0] / i1.abs().max(1e-300) + 1e-14;
    Eval3 { p, dp, d2p, err: rel_err * p.abs() }
}

/// Abel projection from the line: P2(r) = (1/pi) Int_0^inf h(sqrt(r^2+s^2)) ds with
/// h(u) = -P1'(u)/u. The integrand is positive.
pub(crate) fn abel_d2(r: f64, tol: f64, d1: &dyn Fn(f64) -> Option<Eval3>) -> Option<Eval3> {
    let failed = std::cell::Cell::new(false);
    let mut f = |s: f64| {
        let u = (r * r + s * s).sqrt();
        match d1(u) {
            Some(e) if u > 0.0 => {
                let h = -e.dp / u;
                let dh = (-e.d2p + e.dp / u) / u;
                [h, dh * r / u]
            }
            Some(e) => [-e.d2p, 0.0],
            None => {
                failed.set(true);
                [0.0, 0.0]
            }
        }
    };
    let scale = 1.0f64.max(r);
    let mut breaks = vec![0.0];
    let mut s = 0.125 * scale;
    let h0 = f(0.0)[0];
    while s < 1e5 * scale {
        breaks.push(s);
        // stop once the remaining integral is negligible (fast decay near alpha = 2)
        if f(s)[0] * s < 1e-4 * tol * h0 * scale {
            break;
        }
        s *= 2.0;
    }
    if failed.get() {
        return None;
    }
    let at = abs_tols(&mut f, &breaks, 1e-3 * tol, |p| [p / (1.0 + r), p / (1.0 + r)]);
    let q = adaptive(&mut f, &breaks, at, MAX_PANELS);
    if failed.get() {
        return None;
    }
    let p = q.value[0] / PI;
    Some(Eval3 {
        p,
        dp: q.value[1] / PI,
        d2p: f64::NAN,
        err: q.error[0] / PI + 1e-14 * p.abs(),
    })
}
