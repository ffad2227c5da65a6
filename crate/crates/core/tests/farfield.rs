mod common;

use fracconv::cauchy_solver::*;
use fracconv::farfield::*;
use fracconv::grid::{Field, SpatialGrid};
use fracconv::linear_semigroup::{apply_semigroup, convolution_table};
use fracconv::{kernel_constants, KernelParams};
use proptest::prelude::*;
use std::sync::{Arc, OnceLock};

fn stretched() -> Arc<SpatialGrid> {
    SpatialGrid::stretched(0.05, 1.02, 8.0, 2e4).unwrap()
}

fn burgers() -> NonlinearitySpec {
    NonlinearitySpec::burgers(vec![1.0]).unwrap()
}

/// Short Burgers run on the stretched grid, 20 snapshots in [0, 0.2].
fn short_run() -> &'static (Field, Trajectory) {
    static RUN: OnceLock<(Field, Trajectory)> = OnceLock::new();
    RUN.get_or_init(|| {
        let u0 = InitialData::ScaledProfile { amplitude: 0.5 }.sample(&stretched(), 1.5).unwrap();
        let snaps: Vec<f64> = (1..=20).map(|k| 0.01 * k as f64).collect();
        let traj = solve_picard(&u0, 1.5, &burgers(), 0.2, PicardParams::default(), &snaps).unwrap();
        (u0, traj)
    })
}

fn power_field(grid: &Arc<SpatialGrid>, f: impl Fn(f64) -> f64) -> Field {
    Field::from_fn(grid.clone(), |x, _| if x == 0.0 { 1.0 } else { f(x.abs()) }).unwrap()
}

#[test]
fn exact_power_law_is_recovered() {
    let g = stretched();
    let v = power_field(&g, |r| 3.0 * r.powf(-2.5));
    let fit = fit_tail_exponent(&v, [50.0, 500.0], Parity::Abs).unwrap();
    assert!((fit.exponent + 2.5).abs() < 1e-10);
    assert!((fit.coefficient - 3.0).abs() < 1e-9);
    assert!(fit.max_rel_residual < 1e-9);
    assert!(fit.window == [50.0, 500.0] && fit.nodes >= 8);
    assert!(fit.contamination_estimate >= 0.0);
}

#[test]
fn perturbed_power_law_bias() {
    let g = stretched();
    let v = power_field(&g, |r| r.powf(-2.5) * (1.0 + 0.5 / r));
    let fit = fit_tail_exponent(&v, [50.0, 500.0], Parity::EvenPart).unwrap();
    assert!(fit.exponent > -2.51 && fit.exponent < -2.50, "{}", fit.exponent);
}

#[test]
fn stable_profile_tail_fit() {
    // exponent to 0.01; the coefficient carries the bias of the next series term,
    // reproduced here by fitting the two-term series on the same nodes
    let a = 1.5;
    let g = stretched();
    let tab = convolution_table(a).unwrap();
    let v = power_field(&g, |r| tab.value(r));
    let fit = fit_tail_exponent(&v, [50.0, 500.0], Parity::Abs).unwrap();
    assert!((fit.exponent + 2.5).abs() < 0.01, "{}", fit.exponent);
    let c0 = common::c0(a, 1.0);
    let a2 = 6.0 / (2.0 * std::f64::consts::PI) * -(1.5 * std::f64::consts::PI).sin();
    let two_term = power_field(&g, |r| c0 * r.powf(-2.5) + a2 * r.powf(-4.0));
    let oracle = fit_tail_exponent(&two_term, [50.0, 500.0], Parity::Abs).unwrap();
    assert!((fit.coefficient / oracle.coefficient - 1.0).abs() < 2e-3, "{} vs {}", fit.coefficient, oracle.coefficient);
    assert!((fit.exponent - oracle.exponent).abs() < 1e-3);
}

#[test]
fn fit_errors() {
    let g = stretched();
    let odd = Field::from_fn(g.clone(), |x, _| x * (1.0 + x.abs()).powf(-4.0)).unwrap();
    // positive half-line only: |v| has one sign there, the even part vanishes
    assert!(fit_tail_exponent(&odd, [50.0, 500.0], Parity::OddPart).is_ok());
    assert!(fit_tail_exponent(&odd, [50.0, 500.0], Parity::EvenPart).is_err());
    let osc = Field::from_fn(g.clone(), |x, _| (x / 30.0).cos() * (1.0 + x.abs()).powf(-2.0)).unwrap();
    let e = fit_tail_exponent(&osc, [50.0, 5000.0], Parity::Abs).unwrap_err();
    assert!(e.to_string().contains("projection"), "{e}");
    assert!(fit_tail_exponent(&osc, [50.0, 52.0], Parity::Abs).is_err());
    assert!(fit_tail_exponent(&osc, [500.0, 50.0], Parity::Abs).is_err());
}

#[test]
fn predicted_orders() {
    let fixed = TimeMode::FixedT;
    let o = |a, d, q, v| predicted_remainder_order(a, d, q, v, fixed).unwrap().exponent;
    assert!((o(1.5, 1, 2.0, RemainderVariant::I) - 4.5).abs() < 1e-14);
    assert!((o(1.5, 1, 2.0, RemainderVariant::Ii) - 4.5).abs() < 1e-14);
    assert!((o(1.5, 1, 1.3, RemainderVariant::I) - 3.25).abs() < 1e-14);
    assert!((o(1.5, 1, 1.3, RemainderVariant::Ii) - 4.25).abs() < 1e-14);
    assert!((o(1.6, 1, 1.6, RemainderVariant::SelfsimD1) - 4.16).abs() < 1e-12);
    assert!((o(1.8, 1, 1.8, RemainderVariant::SelfsimD1) - 4.8).abs() < 1e-12);
    assert!((o(1.9, 2, 1.45, RemainderVariant::SelfsimDge2) - 1.45 * 3.9).abs() < 1e-12);
    let e = predicted_remainder_order(1.3, 1, 1.3, RemainderVariant::SelfsimD1, fixed).unwrap_err();
    assert!(e.to_string().contains("outside Remark hypotheses (requires q̃ > q*)"), "{e}");
    assert!(predicted_remainder_order(1.6, 1, 2.0, RemainderVariant::SelfsimD1, fixed).is_err());
    assert!(predicted_remainder_order(2.5, 1, 2.0, RemainderVariant::I, fixed).is_err());
    let u = predicted_remainder_order(1.5, 1, 2.0, RemainderVariant::I, TimeMode::UniformN).unwrap();
    assert_eq!(u.n_bound, Some(3.0));
    assert_eq!(predicted_remainder_order(1.5, 1, 2.0, RemainderVariant::I, fixed).unwrap().n_bound, None);
}

#[test]
fn mass_moment_properties() {
    let g = SpatialGrid::uniform(1, 512, 30.0).unwrap();
    let snaps = |n: usize| (1..=n).map(|k| k as f64 / n as f64).collect::<Vec<f64>>();
    let z = Field::zeros(g.clone());
    let zt = solve_spectral(&z, 1.5, &burgers(), 1.0, SpectralParams::new(0.01), &snaps(20)).unwrap();
    assert_eq!(mass_moment(&zt, &burgers(), 1.0).unwrap().value, vec![0.0]);

    let fneg = NonlinearitySpec::burgers(vec![-2.0]).unwrap();
    let u0 = InitialData::Bump { amplitude: 0.7, width: 2.0 }.sample(&g, 1.5).unwrap();
    let coarse = solve_spectral(&u0, 1.5, &fneg, 1.0, SpectralParams::new(0.01), &snaps(20)).unwrap();
    let fine = solve_spectral(&u0, 1.5, &fneg, 1.0, SpectralParams::new(0.01), &snaps(40)).unwrap();
    let mc = mass_moment(&coarse, &fneg, 1.0).unwrap();
    let mf = mass_moment(&fine, &fneg, 1.0).unwrap();
    assert!(mc.value[0] / -2.0 > 0.0);
    assert!((mc.value[0] / mf.value[0] - 1.0).abs() < 0.01);
    let simpson = mass_moment_with(&coarse, &fneg, 1.0, TimeRule::Simpson).unwrap();
    assert!((simpson.value[0] / mc.value[0] - 1.0).abs() < 0.005);
    // density and time checks
    let sparse = solve_spectral(&u0, 1.5, &fneg, 1.0, SpectralParams::new(0.01), &snaps(10)).unwrap();
    assert!(mass_moment(&sparse, &fneg, 1.0).is_err());
    assert!(mass_moment(&coarse, &fneg, 0.525).is_err());
    let odd_count = solve_spectral(&u0, 1.5, &fneg, 1.0, SpectralParams::new(0.01), &snaps(21)).unwrap();
    assert!(mass_moment_with(&odd_count, &fneg, 1.0, TimeRule::Simpson).is_err());
}

#[test]
fn prediction_without_flux_is_the_semigroup() {
    let u0 = InitialData::Bump { amplitude: 1.0, width: 1.5 }.sample(&stretched(), 1.5).unwrap();
    let f = NonlinearitySpec::linear(1);
    let snaps: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
    let traj = solve_picard(&u0, 1.5, &f, 1.0, PicardParams::default(), &snaps).unwrap();
    let p = expansion_prediction(&u0, &traj, 1.5, &f, 1.0).unwrap();
    assert!(p.second.values.iter().all(|&v| v == 0.0));
    let s = apply_semigroup(&u0, 1.5, 1.0).unwrap();
    assert_eq!(p.total.values, s.values);
    let r = remainder_field(&traj, &u0, 1.5, &f, 1.0).unwrap();
    let rel = r.values.iter().zip(&s.values).fold(0.0f64, |m, (a, b)| m.max(a.abs() / b.abs().max(1e-300)));
    assert!(rel < 1e-12, "{rel}");
    let rep = verify_expansion(&u0, &traj, 1.5, &f, 1.0, [50.0, 2000.0], RemainderVariant::I).unwrap();
    assert!(rep.second_order_coeff_fitted.abs() <= 3.0 * rep.coeff_std_error);
    assert!(rep.remainder_fit.is_none());
    assert_eq!(rep.regime, ExpansionRegime::PartI);
}

#[test]
fn second_term_shape_and_parity() {
    let (u0, traj) = short_run();
    let a = 1.5;
    let f = burgers();
    let p = expansion_prediction(u0, traj, a, &f, 0.2).unwrap();
    let c1 = kernel_constants(&KernelParams::new(a, 1).unwrap()).unwrap().c1;
    assert!((p.c1 / c1 - 1.0).abs() < 1e-15);
    let m = p.mass_moment.value[0];
    assert!(m > 0.0);
    let g = u0.grid.clone();
    let nodes = g.as_stretched().unwrap().nodes();
    let i = nodes.iter().position(|&x| x > 2e3).unwrap();
    let x = nodes[i];
    assert!((p.second.values[i] / (c1 * m * x.powf(-3.5)) - 1.0).abs() < 1e-12);
    for j in 0..nodes.len() {
        assert_eq!(p.second.values[j], -p.second.values[g.mirror(j)]);
    }
    // the Duhamel part of u points along b c1 M_f far out
    let rep = verify_expansion(u0, traj, a, &f, 0.2, [50.0, 2000.0], RemainderVariant::I).unwrap();
    assert!(rep.sign_agrees);
    assert!((rep.second_order_coeff_fitted / rep.second_order_coeff_predicted - 1.0).abs() < 0.05);
    assert!(rep.remainder_exponent_predicted == 4.5);
}

#[test]
fn envelope_needs_two_times() {
    let (u0, traj) = short_run();
    assert!(remainder_envelope(u0, traj, 1.5, &burgers(), &[0.2], [50.0, 2000.0], 4.5).is_err());
    // t = 0.1 has only half the snapshots the mass moment needs
    let e = remainder_envelope(u0, traj, 1.5, &burgers(), &[0.1, 0.2], [50.0, 2000.0], 4.5).unwrap_err();
    assert!(e.to_string().contains("need at least 20"), "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variant_ii_never_worse(alpha in 1.01f64..1.99, d in 1usize..4, q in 1.01f64..4.0) {
        let i = predicted_remainder_order(alpha, d, q, RemainderVariant::I, TimeMode::FixedT).unwrap().exponent;
        let ii = predicted_remainder_order(alpha, d, q, RemainderVariant::Ii, TimeMode::FixedT).unwrap().exponent;
        // a larger decay order is a stronger statement
        prop_assert!(ii >= i);
        prop_assert!(ii <= alpha + d as f64 + 2.0 + 1e-12);
    }

    #[test]
    fn pure_power_laws_fit_exactly(c in 0.1f64..10.0, e in 1.0f64..6.0, lo in 20.0f64..100.0) {
        let g = stretched();
        let v = power_field(&g, |r| c * r.powf(-e));
        let fit = fit_tail_exponent(&v, [lo, 20.0 * lo], Parity::Envelope).unwrap();
        prop_assert!(fit.max_rel_residual < 1e-9);
        prop_assert!((fit.exponent + e).abs() < 1e-9);
    }
}
