use fracconv::cauchy_solver::*;
use fracconv::grid::{Field, SpatialGrid};
use fracconv::linear_semigroup::{apply_semigroup, convolution_table, resample_periodic, weighted_norm, NormVariant};
use fracconv::Error;
use proptest::prelude::*;
use std::sync::Arc;

fn periodic(n: usize, l: f64) -> Arc<SpatialGrid> {
    SpatialGrid::uniform(1, n, l).unwrap()
}

fn stretched() -> Arc<SpatialGrid> {
    SpatialGrid::stretched(0.05, 1.02, 8.0, 2e4).unwrap()
}

fn burgers() -> NonlinearitySpec {
    NonlinearitySpec::burgers(vec![1.0]).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn critical_exponent_examples() {
    let c = critical_exponents(1.5, 1).unwrap();
    assert!((c.q_tilde - 1.5).abs() < 1e-15 && (c.q_star - 1.4).abs() < 1e-15);
    let c = critical_exponents(1.5, 2).unwrap();
    assert!((c.q_tilde - 1.25).abs() < 1e-15 && (c.q_star - (1.0 + 1.0 / 3.5)).abs() < 1e-15);
    let c = critical_exponents(1.0 + 1e-9, 3).unwrap();
    assert!(c.q_tilde - 1.0 < 1e-9);
    assert!(critical_exponents(2.0, 1).is_err());
    assert!(critical_exponents(1.5, 0).is_err());
}

#[test]
fn nonlinearity_validation() {
    assert!(NonlinearitySpec::power_law(1.0, vec![1.0]).is_err());
    assert!(NonlinearitySpec::power_law(2.0, vec![]).is_err());
    let f = NonlinearitySpec::critical(1.6, vec![2.0]).unwrap();
    assert!((f.q - 1.6).abs() < 1e-15);
    assert!((f.growth_const() - 2.0 * 2f64.powf(0.6) * 1.6).abs() < 1e-13);
    assert!(NonlinearitySpec::linear(1).is_linear());
}

#[test]
fn spectral_mass_is_conserved() {
    let g = periodic(1024, 40.0);
    let u0 = InitialData::Bump { amplitude: 0.8, width: 3.0 }.sample(&g, 1.5).unwrap();
    let m0 = u0.integral();
    let traj = solve_spectral(&u0, 1.5, &burgers(), 2.0, SpectralParams::new(1e-2), &[0.5, 1.0]).unwrap();
    traj.check().unwrap();
    assert_eq!(traj.times(), vec![0.0, 0.5, 1.0, 2.0]);
    for s in &traj.snapshots {
        assert!((s.integral() / m0 - 1.0).abs() < 1e-12, "{}", s.integral() / m0);
    }
}

#[test]
fn spectral_without_flux_is_the_semigroup() {
    let g = periodic(512, 30.0);
    let u0 = InitialData::Bump { amplitude: 1.0, width: 2.0 }.sample(&g, 1.7).unwrap();
    let traj = solve_spectral(&u0, 1.7, &NonlinearitySpec::linear(1), 1.3, SpectralParams::new(0.1), &[]).unwrap();
    let s = apply_semigroup(&u0, 1.7, 1.3).unwrap();
    assert!(sup_diff(&traj.snapshots[1].values, &s.values) < 1e-10);
}

#[test]
fn small_amplitude_correction_is_quadratic() {
    // ‖u_ε(t) − ε S(t)u0‖/ε² should not depend on ε when q = 2
    let g = periodic(1024, 40.0);
    let base = InitialData::Bump { amplitude: 1.0, width: 2.0 }.sample(&g, 1.5).unwrap();
    let lin = apply_semigroup(&base, 1.5, 1.0).unwrap();
    let ratio = |eps: f64| {
        let u0 = base.scaled(eps);
        let traj = solve_spectral(&u0, 1.5, &burgers(), 1.0, SpectralParams::new(1e-2), &[]).unwrap();
        let u = &traj.snapshots[1].values;
        u.iter().zip(&lin.values).fold(0.0f64, |m, (a, b)| m.max((a - eps * b).abs())) / (eps * eps)
    };
    let (a, b) = (ratio(1e-2), ratio(1e-3));
    assert!(a.is_finite() && a > 0.0);
    assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
}

#[test]
fn spectral_refinement_converges() {
    let a = 1.5;
    let ic = InitialData::Bump { amplitude: 0.5, width: 2.0 };
    let coarse = {
        let g = periodic(1024, 40.0);
        let u0 = ic.sample(&g, a).unwrap();
        solve_spectral(&u0, a, &burgers(), 1.0, SpectralParams::new(0.02), &[]).unwrap()
    };
    let fine = {
        let g = periodic(2048, 40.0);
        let u0 = ic.sample(&g, a).unwrap();
        solve_spectral(&u0, a, &burgers(), 1.0, SpectralParams::new(0.01), &[]).unwrap()
    };
    let c = &coarse.snapshots[1].values;
    let f = &fine.snapshots[1].values;
    let d = c.iter().enumerate().fold(0.0f64, |m, (j, v)| m.max((v - f[2 * j]).abs()));
    assert!(d < 1e-5, "{d}");
}

#[test]
fn spectral_rejects_bad_input() {
    let sg = stretched();
    let u0 = Field::zeros(sg);
    assert!(matches!(
        solve_spectral(&u0, 1.5, &burgers(), 1.0, SpectralParams::new(0.1), &[]),
        Err(Error::GridMismatch(_))
    ));
    let g = periodic(64, 10.0);
    let u0 = Field::zeros(g);
    assert!(solve_spectral(&u0, 2.5, &burgers(), 1.0, SpectralParams::new(0.1), &[]).is_err());
    assert!(solve_spectral(&u0, 1.5, &burgers(), 1.0, SpectralParams::new(0.1), &[-1.0]).is_err());
    let f2 = NonlinearitySpec::burgers(vec![1.0, 0.0]).unwrap();
    assert!(solve_spectral(&u0, 1.5, &f2, 1.0, SpectralParams::new(0.1), &[]).is_err());
}

#[test]
fn spectral_two_dimensional_smoke() {
    let g = SpatialGrid::uniform(2, 256, 20.0).unwrap();
    let u0 = InitialData::Bump { amplitude: 0.5, width: 3.0 }.sample(&g, 1.5).unwrap();
    let f = NonlinearitySpec::power_law(1.25, vec![1.0, 0.5]).unwrap();
    let traj = solve_spectral(&u0, 1.5, &f, 0.5, SpectralParams::new(0.05), &[]).unwrap();
    let m0 = u0.integral();
    let u = traj.snapshots.last().unwrap();
    assert!((u.integral() / m0 - 1.0).abs() < 1e-12);
    assert!(u.sup_norm() < u0.sup_norm());
}

#[test]
fn picard_without_flux_is_the_semigroup() {
    let sg = stretched();
    let u0 = InitialData::ScaledProfile { amplitude: 0.7 }.sample(&sg, 1.5).unwrap();
    let traj = solve_picard(&u0, 1.5, &NonlinearitySpec::linear(1), 0.6, PicardParams::default(), &[0.2]).unwrap();
    let s = apply_semigroup(&u0, 1.5, 0.6).unwrap();
    let u = traj.at(0.6).unwrap();
    let rel = u.values.iter().zip(&s.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / b.abs()));
    assert!(rel < 1e-12, "{rel}");
    assert_eq!(traj.meta.method, "duhamel-picard");
}

#[test]
fn picard_matches_spectral_in_the_trusted_window() {
    // three (alpha, flux) configurations; periodic reference resampled at stretched nodes
    let cases = [
        (1.5, burgers()),
        (1.75, NonlinearitySpec::power_law(2.0, vec![1.0]).unwrap()),
        (1.5, NonlinearitySpec::power_law(1.8, vec![-1.0]).unwrap()),
    ];
    let sg = stretched();
    let ug = periodic(2048, 51.2);
    let nodes = sg.as_stretched().unwrap().nodes().to_vec();
    let l4 = 51.2 / 4.0;
    let window: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].abs() <= l4).collect();
    let xs: Vec<f64> = window.iter().map(|&i| nodes[i]).collect();
    for (a, f) in cases {
        let ic = InitialData::ScaledProfile { amplitude: 0.5 };
        let us = ic.sample(&sg, a).unwrap();
        let uu = ic.sample(&ug, a).unwrap();
        let p = solve_picard(&us, a, &f, 1.0, PicardParams::default(), &[]).unwrap();
        let s = solve_spectral(&uu, a, &f, 1.0, SpectralParams::new(2e-3), &[]).unwrap();
        let sv = resample_periodic(s.snapshots.last().unwrap(), &xs).unwrap();
        let pv: Vec<f64> = window.iter().map(|&i| p.snapshots.last().unwrap().values[i]).collect();
        let d = sup_diff(&pv, &sv) / us.sup_norm();
        assert!(d < 1e-4, "alpha {a}, q {}: {d:.3e}", f.q);
    }
}

#[test]
fn picard_mass_and_iteration_count() {
    let sg = stretched();
    let f = burgers();
    let params = PicardParams { first_window: Some(0.05), growth: 1.0, ..PicardParams::default() };
    let run = |amp: f64| {
        let u0 = InitialData::ScaledProfile { amplitude: amp }.sample(&sg, 1.5).unwrap();
        let m0 = u0.integral() + u0.tail_mass();
        let t = solve_picard(&u0, 1.5, &f, 0.05, params, &[]).unwrap();
        let u = t.snapshots.last().unwrap();
        let m = u.integral() + u.tail_mass();
        assert!((m / m0 - 1.0).abs() < 1e-6, "mass drift {}", m / m0 - 1.0);
        t.meta.iterations[0]
    };
    let big = run(0.5);
    let small = run(0.05);
    assert!(small < big, "{small} vs {big}");
}

#[test]
fn picard_reports_non_contraction() {
    let sg = stretched();
    let u0 = InitialData::ScaledProfile { amplitude: 40.0 }.sample(&sg, 1.5).unwrap();
    let params = PicardParams { first_window: Some(0.5), window_const: 0.5, max_iter: 8, ..PicardParams::default() };
    // force a window far beyond the contraction cap
    let params = PicardParams { window_const: 1e6, ..params };
    match solve_picard(&u0, 1.5, &burgers(), 0.5, params, &[]) {
        Err(Error::NonContraction { window, t0, .. }) => {
            assert_eq!(window, 0);
            assert_eq!(t0, 0.0);
        }
        other => panic!("expected non-contraction, got {:?}", other.map(|t| t.meta)),
    }
}

#[test]
fn window_cap_scaling() {
    let f = burgers();
    assert_eq!(window_cap(0.5, 1.5, &f, 0.25), 0.25);
    // exponent -alpha (q-1)/(alpha-1) = -3
    assert!((window_cap(2.0, 1.5, &f, 0.25) - 0.25 / 8.0).abs() < 1e-15);
    assert_eq!(window_cap(5.0, 1.5, &NonlinearitySpec::linear(1), 0.25), 0.25);
}

#[test]
fn decay_rates_and_monotonicity() {
    let a = 1.5;
    let g = periodic(4096, 400.0);
    let u0 = InitialData::Bump { amplitude: 0.5, width: 2.0 }.sample(&g, a).unwrap();
    let snaps: Vec<f64> = (0..=40).map(|k| 10f64.powf(k as f64 / 20.0)).collect();
    let traj = solve_spectral(&u0, a, &burgers(), 100.0, SpectralParams::new(0.05), &snaps).unwrap();
    let rep = decay_report(&traj, a, &[1.0, 2.0, f64::INFINITY]).unwrap();
    assert_eq!(rep.window, [10.0, 100.0]);
    let inf = &rep.entries[2];
    assert!((inf.slope + 2.0 / 3.0).abs() < 0.05, "{}", inf.slope);
    assert!((inf.predicted_slope + 2.0 / 3.0).abs() < 1e-15);
    let l1 = &rep.entries[0];
    assert!(l1.slope.abs() < 0.01 && l1.predicted_slope == 0.0);
    for e in &rep.entries {
        for w in e.norms.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "p = {}: {} -> {}", e.p, w[0], w[1]);
        }
    }
    // less than a decade is refused
    let short = solve_spectral(&u0, a, &burgers(), 1.0, SpectralParams::new(0.05), &[0.5]).unwrap();
    assert!(decay_report(&short, a, &[2.0]).is_err());
}

#[test]
fn domination_examples() {
    let a = 1.5;
    let tab = convolution_table(a).unwrap();
    // u0 = P_alpha with no flux: u = p(., 1 + t), C = 1 (free space, so no periodic images)
    let sg = stretched();
    let u0 = InitialData::DeltaApprox { mass: 1.0, width: 1.0 }.sample(&sg, a).unwrap();
    let traj = solve_picard(&u0, a, &NonlinearitySpec::linear(1), 4.0, PicardParams::default(), &[1.0, 2.0]).unwrap();
    let rep = domination_check(&traj, a, &NonlinearitySpec::linear(1)).unwrap();
    assert!((rep.constant - 1.0).abs() < 1e-4, "{}", rep.constant);

    let g = periodic(4096, 200.0);

    // zero field
    let z = Field::zeros(g.clone());
    let zt = solve_spectral(&z, a, &burgers(), 1.0, SpectralParams::new(0.5), &[]).unwrap();
    assert_eq!(domination_check(&zt, a, &burgers()).unwrap().constant, 0.0);

    // Burgers with q = 2 > q~: stable under horizon doubling
    let u0 = InitialData::ScaledProfile { amplitude: 0.3 }.sample(&g, a).unwrap();
    assert!(u0.values.iter().all(|v| v.is_finite()) && tab.value(0.0) > 0.0);
    let snaps: Vec<f64> = (1..=20).map(|k| k as f64).collect();
    let traj = solve_spectral(&u0, a, &burgers(), 20.0, SpectralParams::new(0.05), &snaps).unwrap();
    let full = domination_check(&traj, a, &burgers()).unwrap();
    let half = Trajectory { snapshots: traj.snapshots[..=10].to_vec(), meta: traj.meta.clone() };
    let half = domination_check(&half, a, &burgers()).unwrap();
    assert!(!full.outside_hypotheses);
    assert!(full.constant.is_finite());
    assert!((full.constant / half.constant - 1.0).abs() < 0.05, "{} vs {}", full.constant, half.constant);
    let wmax = full.weighted_ratios.iter().cloned().fold(0.0, f64::max);
    let wmax_half = half.weighted_ratios.iter().cloned().fold(0.0, f64::max);
    assert!((wmax / wmax_half - 1.0).abs() < 0.05);

    let sub = NonlinearitySpec::power_law(1.2, vec![1.0]).unwrap();
    assert!(domination_check(&traj, a, &sub).unwrap().outside_hypotheses);
}

#[test]
fn weighted_norm_of_initial_library() {
    let sg = stretched();
    let v = InitialData::Algebraic { amplitude: 2.0 }.sample(&sg, 1.5).unwrap();
    let r = weighted_norm(&v, 2.5, NormVariant::Inhomogeneous);
    assert!((r.norm - 2.0).abs() < 1e-12);
    let b = InitialData::Bump { amplitude: 1.0, width: 1.0 }.sample(&sg, 1.5).unwrap();
    assert!((b.sup_norm() - 1.0).abs() < 1e-15);
    assert!(b.values.iter().zip(sg.as_stretched().unwrap().nodes()).all(|(v, x)| x.abs() < 1.0 || *v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn flux_growth_and_lipschitz(q in 1.05f64..3.0, b in -3.0f64..3.0, u in -5.0f64..5.0, v in -5.0f64..5.0) {
        let f = NonlinearitySpec::power_law(q, vec![b]).unwrap();
        let c = f.growth_const();
        let fu = b * f.g(u);
        let fv = b * f.g(v);
        prop_assert!(fu.abs() <= c * u.abs().powf(q) * (1.0 + 1e-12) + 1e-300);
        prop_assert!((fu - fv).abs() <= c * (u - v).abs() * (u.abs().powf(q - 1.0) + v.abs().powf(q - 1.0)) * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn spectral_mass_and_lp_non_expansion(amp in 0.05f64..1.0, width in 1.0f64..4.0, alpha in 1.2f64..1.9) {
        let g = periodic(512, 40.0);
        let u0 = InitialData::Bump { amplitude: amp, width }.sample(&g, alpha).unwrap();
        let m0 = u0.integral();
        let snaps: Vec<f64> = (1..=10).map(|k| 0.2 * k as f64).collect();
        let traj = solve_spectral(&u0, alpha, &burgers(), 2.0, SpectralParams::new(0.02), &snaps).unwrap();
        for s in &traj.snapshots {
            prop_assert!((s.integral() / m0 - 1.0).abs() < 1e-10);
        }
        for p in [1.0, 2.0, f64::INFINITY] {
            for w in traj.snapshots.windows(2) {
                let (a, b) = (lp(&w[0], p), lp(&w[1], p));
                prop_assert!(b <= a * (1.0 + 1e-8), "p = {} : {} -> {}", p, a, b);
            }
        }
    }
}
