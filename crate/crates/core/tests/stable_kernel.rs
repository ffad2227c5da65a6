mod common;

use common::{c0, c1, gamma, profile_d1_deriv_simpson, profile_d1_simpson, rel};
use fracconv::{closed_form_oracle, kernel_constants, KernelParams, KernelTable, Regime, StableKernel, TailWhich};
use proptest::prelude::*;
use std::f64::consts::PI;

fn kernel(alpha: f64, dim: usize) -> StableKernel {
    StableKernel::new(KernelParams::new(alpha, dim).unwrap()).unwrap()
}

#[test]
fn constants_cauchy_endpoint() {
    let k = kernel_constants(&KernelParams::new(1.0, 1).unwrap()).unwrap();
    assert!((k.c0 - 1.0 / PI).abs() < 1e-15);
    assert!((k.c1 - 2.0 / PI).abs() < 1e-15);
}

#[test]
fn constants_match_independent_gamma() {
    for &(a, d) in &[(1.5, 1usize), (1.25, 1), (1.75, 2), (1.1, 3), (1.9, 2)] {
        let k = kernel_constants(&KernelParams::new(a, d).unwrap()).unwrap();
        assert!(rel(k.c0, c0(a, d as f64)) < 1e-13, "c0 at {a},{d}");
        assert!(rel(k.c1, c1(a, d as f64)) < 1e-13, "c1 at {a},{d}");
    }
    let k = kernel_constants(&KernelParams::new(1.5, 1).unwrap()).unwrap();
    assert!((k.c0 - 0.29920).abs() < 1e-5 && (k.c1 - 0.74801).abs() < 1e-5);
}

#[test]
fn constants_ratio_sweep() {
    for i in 0..20 {
        let a = 1.02 + 0.0475 * i as f64;
        let d = 1 + i % 3;
        let k = kernel_constants(&KernelParams::new(a, d).unwrap()).unwrap();
        assert!(k.c0 > 0.0 && k.c1 > 0.0);
        assert!((k.c1 / k.c0 - (a + d as f64)).abs() < 1e-12, "alpha {a}, d {d}");
    }
}

#[test]
fn constants_reject_bad_params() {
    assert!(KernelParams::new(2.5, 1).is_err());
    assert!(KernelParams::new(0.8, 1).is_err());
    assert!(KernelParams::new(1.5, 4).is_err());
    assert!(KernelParams::with_tol(1.5, 1, 1e-2).is_err());
}

#[test]
fn origin_values() {
    assert!(rel(kernel(1.0, 1).eval_profile(0.0).unwrap(), 1.0 / PI) < 1e-12);
    let p = kernel(1.5, 1).eval_profile(0.0).unwrap();
    assert!(rel(p, gamma(5.0 / 3.0) / PI) < 1e-12);
    assert!((p - 0.287353).abs() < 1e-6);
    let g = kernel(2.0, 1).eval_profile(2.0).unwrap();
    assert!(rel(g, (4.0 * PI).powf(-0.5) * (-1.0f64).exp()) < 1e-10);
}

#[test]
fn closed_form_examples() {
    assert!(rel(closed_form_oracle(1.0, 1, &[0.0]).unwrap(), 1.0 / PI) < 1e-15);
    assert!((closed_form_oracle(2.0, 1, &[0.0]).unwrap() - 0.282095).abs() < 1e-6);
    assert!(rel(closed_form_oracle(1.0, 2, &[0.0, 0.0]).unwrap(), 1.0 / (2.0 * PI)) < 1e-14);
    assert!(closed_form_oracle(1.5, 1, &[0.0]).is_err());
}

#[test]
fn oracle_match_on_zero_to_fifty() {
    for &a in &[1.0, 2.0] {
        for d in 1..=3usize {
            let k = kernel(a, d);
            let mut r = 0.0;
            while r <= 50.0 {
                let mut x = vec![0.0; d];
                x[0] = r;
                let exact = closed_form_oracle(a, d, &x).unwrap();
                let got = k.eval_profile(r).unwrap();
                assert!(rel(got, exact) < 1e-8, "alpha {a} d {d} r {r}: {got} vs {exact}");
                r += if r < 5.0 { 0.125 } else { 0.875 };
            }
        }
    }
}

#[test]
fn gradient_examples() {
    let g = kernel(1.0, 1).eval_profile_grad(&[1.0]).unwrap();
    assert!(rel(g[0], -1.0 / (2.0 * PI)) < 1e-9);
    assert_eq!(kernel(1.5, 2).eval_profile_grad(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    let k = kernel(1.5, 1);
    let g = k.eval_profile_grad(&[100.0]).unwrap()[0];
    let lead = -c1(1.5, 1.0) * 100f64.powf(-3.5);
    assert!(rel(g, lead) < 0.01);
    // 2-d gradient against the differentiated Cauchy density
    let g = kernel(1.0, 2).eval_profile_grad(&[0.6, 0.8]).unwrap();
    let dp = -3.0 / (2.0 * PI) * 2f64.powf(-2.5);
    assert!(rel(g[0], dp * 0.6) < 1e-8 && rel(g[1], dp * 0.8) < 1e-8);
}

#[test]
fn midrange_against_independent_quadrature() {
    let k = kernel(1.5, 1);
    for &r in &[0.3, 1.0, 2.5, 4.0, 7.5, 12.0] {
        let pt = k.profile_point(r).unwrap();
        assert!(rel(pt.p, profile_d1_simpson(1.5, r)) < 1e-9, "P at {r}");
        assert!(rel(pt.dp, profile_d1_deriv_simpson(1.5, r)) < 1e-8, "P' at {r}");
    }
}

#[test]
fn kernel_scaling_examples() {
    let k = kernel(1.5, 1);
    let v = k.eval_kernel(&[0.0], 8.0).unwrap();
    assert!(rel(v, 0.25 * gamma(5.0 / 3.0) / PI) < 1e-12);
    assert!((v - 0.071838).abs() < 1e-6);
    assert!(rel(kernel(1.0, 1).eval_kernel(&[0.0], 1.0).unwrap(), 1.0 / PI) < 1e-12);
    for &x in &[0.0, 0.7, 3.0, 40.0] {
        assert_eq!(k.eval_kernel(&[x], 1.0).unwrap(), k.eval_profile(x).unwrap());
    }
    assert!(k.eval_kernel(&[1.0], 0.0).is_err());
    // gradient of the kernel scales with t^{-2/alpha}
    let g = k.eval_kernel_grad(&[2.0], 8.0).unwrap()[0];
    let g1 = k.eval_profile_grad(&[0.5]).unwrap()[0] / 16.0;
    assert!(rel(g, g1) < 1e-12);
}

#[test]
fn tail_expansion_examples() {
    let k = kernel(1.5, 1);
    let v = k.tail_expansion(&[10.0], TailWhich::Value).unwrap()[0];
    assert!(rel(v, 9.4616e-4) < 1e-4);
    let kc = kernel(1.0, 1);
    let v = kc.tail_expansion(&[10.0], TailWhich::Value).unwrap()[0];
    assert!((v / (1.0 / (PI * 101.0)) - 1.01).abs() < 1e-3);
    for &x in &[3.0, -20.0] {
        let g = k.tail_expansion(&[x], TailWhich::Gradient).unwrap()[0];
        let v = k.tail_expansion(&[x], TailWhich::Value).unwrap()[0];
        assert!(rel(g, -2.5 / x.abs() * v * x.signum()) < 1e-13);
    }
    assert!(k.tail_expansion(&[0.0], TailWhich::Value).is_err());
}

#[test]
fn normalization_on_stretched_radii() {
    for &a in &[1.1, 1.5, 1.9] {
        let k = kernel(a, 1);
        // uniform core to 20 with h = 0.02, then ratio 1.004 out to 1e4
        let mut xs = vec![0.0];
        let mut x: f64 = 0.0;
        while x < 20.0 - 1e-12 {
            x += 0.02;
            xs.push(x);
        }
        let mut h: f64 = 0.02;
        while x < 1e4 {
            h *= 1.004;
            x = (x + h).min(1e4);
            xs.push(x);
        }
        let vals: Vec<f64> = xs.iter().map(|&x| k.eval_profile(x).unwrap()).collect();
        let mut s = 0.0;
        for i in 1..xs.len() {
            s += 0.5 * (vals[i] + vals[i - 1]) * (xs[i] - xs[i - 1]);
        }
        let kc = k.constants();
        let e = a + 1.0 - 1.0;
        let total = 2.0 * s + 2.0 * kc.c0 * 1e4f64.powf(-e) / e;
        assert!((total - 1.0).abs() < 1e-6, "alpha {a}: mass {total}");
    }
}

#[test]
fn tail_law_and_correction_rate() {
    let a = 1.5;
    let k = kernel(a, 1);
    let kc = k.constants();
    let dev = |r: f64| r.powf(a + 1.0) * k.eval_profile(r).unwrap() / kc.c0 - 1.0;
    for &r in &[50.0, 100.0, 200.0] {
        assert!(dev(r).abs() < 0.01, "r = {r}");
    }
    // relative correction is O(r^{-alpha}): absolute O(r^{-(2 alpha + d)}) over the leading r^{-(alpha + d)}
    let ratio = dev(200.0) / dev(100.0);
    let base = 2f64.powf(-a);
    assert!(ratio >= 0.5 * base && ratio <= 2.0 * base, "ratio {ratio}");
}

#[test]
fn gradient_bound_shape() {
    let a = 1.5;
    let k = kernel(a, 1);
    let mut r = 0.0;
    let mut samples = Vec::new();
    while r <= 500.0 {
        let g = k.eval_profile_grad(&[r]).unwrap()[0].abs();
        samples.push(g * (1.0 + r).powf(a + 2.0));
        r += if r < 10.0 { 0.1 } else { 2.5 };
    }
    let c = samples.iter().cloned().fold(0.0, f64::max);
    let kc = k.constants();
    assert!(c.is_finite() && c < 10.0 * kc.c1);
    assert!(rel(*samples.last().unwrap(), kc.c1) < 0.05);
}

#[test]
fn cross_regime_continuity() {
    for &(a, d) in &[(1.25, 1usize), (1.5, 1), (1.75, 1), (1.5, 2), (1.6, 3), (1.0, 1), (2.0, 1)] {
        let k = kernel(a, d);
        let tol = k.params().tol;
        let (ro, rt) = k.switch_radii();
        if ro > 0.0 && ro < rt {
            let s = k.profile_point_in(ro, Regime::SeriesOrigin).unwrap();
            let q = k.profile_point_in(ro, Regime::Quadrature).unwrap();
            assert!(rel(s.p, q.p) < 10.0 * tol, "origin switch for {a},{d}: {} vs {}", s.p, q.p);
        }
        if rt.is_finite() && rt > ro {
            let s = k.profile_point_in(rt, Regime::SeriesTail).unwrap();
            let q = k.profile_point_in(rt, Regime::Quadrature).unwrap();
            assert!(rel(s.p, q.p) < 10.0 * tol, "tail switch for {a},{d}: {} vs {}", s.p, q.p);
        }
    }
}

#[test]
fn profile_table_tags_and_checks() {
    let k = kernel(1.5, 1);
    let radii: Vec<f64> = (0..60).map(|i| 0.05 + i as f64 * 1.7).collect();
    let t = k.eval_profile_table(&radii).unwrap();
    assert!(t.regime_tags.contains(&Regime::SeriesOrigin));
    assert!(t.regime_tags.contains(&Regime::Quadrature));
    assert!(t.regime_tags.contains(&Regime::SeriesTail));
    assert!(k.eval_profile_table(&[1.0, 0.5]).is_err());
}

#[test]
fn interpolating_table_matches_direct_evaluation() {
    for &(a, d) in &[(1.5, 1usize), (1.25, 1), (1.75, 2)] {
        let params = KernelParams::new(a, d).unwrap();
        let k = StableKernel::new(params).unwrap();
        let t = KernelTable::shared(&params).unwrap();
        for i in 0..400 {
            let r = 0.0137 * (i as f64).powf(1.7);
            let pt = k.profile_point(r).unwrap();
            assert!(rel(t.value(r), pt.p) < 1e-9, "value a={a} d={d} r={r}: {} vs {} ({:?})", t.value(r), pt.p, pt.regime);
            if r > 0.05 {
                assert!(rel(t.deriv(r), pt.dp) < 1e-8, "deriv a={a} d={d} r={r}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn positive_and_decreasing(a in 1.05f64..1.95, d in 1usize..=3, mut radii in prop::collection::vec(0.0f64..300.0, 2..8)) {
        let k = kernel(a, d);
        radii.sort_by(|x, y| x.partial_cmp(y).unwrap());
        radii.dedup();
        let vals: Vec<f64> = radii.iter().map(|&r| k.eval_profile(r).unwrap()).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-8));
        }
        prop_assert!(vals.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn constants_identity(a in 1.001f64..1.999, d in 1usize..=3) {
        let k = kernel_constants(&KernelParams::new(a, d).unwrap()).unwrap();
        prop_assert!(k.c0 > 0.0 && k.c1 > 0.0);
        prop_assert!((k.c1 / k.c0 - (a + d as f64)).abs() < 1e-12);
    }
}
