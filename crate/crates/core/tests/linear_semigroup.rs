mod common;

use fracconv::linear_semigroup::*;
use fracconv::*;
use proptest::prelude::*;
use std::sync::Arc;

fn delta(grid: &Arc<SpatialGrid>) -> Field {
    let g = grid.as_uniform().unwrap();
    let mut v = vec![0.0; grid.len()];
    v[g.n / 2] = 1.0 / g.h();
    Field::new(grid.clone(), v, 0.0).unwrap()
}

fn stretched() -> Arc<SpatialGrid> {
    SpatialGrid::stretched(0.05, 1.02, 8.0, 2e4).unwrap()
}

fn profile_field(grid: &Arc<SpatialGrid>, alpha: f64, t: f64) -> Field {
    let tab = convolution_table(alpha).unwrap();
    Field::from_fn(grid.clone(), |x, _| tab.kernel(x.abs(), t)).unwrap()
}

#[test]
fn discrete_delta_reproduces_profile() {
    let grid = SpatialGrid::uniform(1, 1 << 14, 200.0).unwrap();
    let s = apply_semigroup(&delta(&grid), 1.5, 1.0).unwrap();
    let k = StableKernel::new(KernelParams::new(1.5, 1).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for i in (0..grid.len()).step_by(97) {
        let x = grid.x(i);
        if x.abs() > 50.0 {
            continue;
        }
        worst = worst.max((s.values[i] - k.eval_profile(x.abs()).unwrap()).abs());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn composition_on_uniform_grid() {
    let grid = SpatialGrid::uniform(1, 1 << 12, 50.0).unwrap();
    let v = Field::from_fn(grid.clone(), |x, _| (-(x - 1.0) * (x - 1.0)).exp() + 0.3 * (-(x + 4.0).powi(2) / 3.0).exp()).unwrap();
    let a = apply_semigroup(&apply_semigroup(&v, 1.5, 0.5).unwrap(), 1.5, 0.7).unwrap();
    let b = apply_semigroup(&v, 1.5, 1.2).unwrap();
    let d = a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(d < 1e-10, "{d}");
    let g2 = SpatialGrid::uniform(2, 128, 20.0).unwrap();
    let v2 = Field::from_fn(g2.clone(), |x, y| (-(x * x + 2.0 * y * y)).exp()).unwrap();
    let a = apply_semigroup(&apply_semigroup(&v2, 1.7, 0.5).unwrap(), 1.7, 0.7).unwrap();
    let b = apply_semigroup(&v2, 1.7, 1.2).unwrap();
    let d = a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(d < 1e-10, "{d}");
}

#[test]
fn zero_field_and_bad_times() {
    for grid in [SpatialGrid::uniform(1, 256, 10.0).unwrap(), stretched()] {
        let z = Field::zeros(grid.clone());
        assert!(apply_semigroup(&z, 1.5, 0.3).unwrap().values.iter().all(|&v| v == 0.0));
        assert!(apply_semigroup(&z, 1.5, 0.0).is_err());
        assert!(apply_semigroup(&z, 1.5, -1.0).is_err());
        assert!(apply_semigroup(&z, 2.5, 1.0).is_err());
        assert_eq!(weighted_norm(&z, 2.0, NormVariant::Inhomogeneous).norm, 0.0);
        let g = vec![z.clone()];
        assert_eq!(e_norm(&z, &g, 1.5).unwrap(), 0.0);
        let rep = verify_semigroup_bounds(&z, 1.5, &[0.5, 1.0], true).unwrap();
        assert!(rep.estimates.iter().all(|e| e.constant == 0.0));
    }
}

#[test]
fn field_rejects_mismatches() {
    let grid = SpatialGrid::uniform(1, 64, 10.0).unwrap();
    assert!(matches!(Field::new(grid.clone(), vec![0.0; 63], 0.0), Err(Error::GridMismatch(_))));
    assert!(Field::new(grid.clone(), vec![f64::NAN; 64], 0.0).is_err());
    let other = SpatialGrid::uniform(1, 128, 10.0).unwrap();
    let a = Field::zeros(grid);
    let b = Field::zeros(other);
    assert!(e_norm(&a, &[b], 1.5).is_err());
    assert!(SpatialGrid::uniform(1, 100, 10.0).is_err());
    assert!(SpatialGrid::stretched(0.1, 1.2, 5.0, 1e4).is_err());
    assert!(SpatialGrid::stretched(0.1, 1.05, 5.0, 500.0).is_err());
}

#[test]
fn stretched_grid_structure() {
    let grid = stretched();
    let g = grid.as_stretched().unwrap();
    let x = g.nodes();
    assert!(x.windows(2).all(|w| w[1] > w[0]));
    for i in 0..x.len() {
        assert_eq!(x[i], -x[g.mirror(i)]);
    }
    assert_eq!(*x.last().unwrap(), 2e4);
    // cubic weights integrate cubics exactly
    let w = g.weights();
    let s: f64 = x.iter().zip(w).map(|(x, w)| w * (1.0 + x * x * 1e-8)).sum();
    let exact = 4e4 + 2.0 * 2e4f64.powi(3) / 3.0 * 1e-8;
    assert!((s / exact - 1.0).abs() < 1e-13);
}

#[test]
fn weighted_norm_examples() {
    let grid = SpatialGrid::uniform(1, 1024, 40.0).unwrap();
    let v = Field::from_fn(grid.clone(), |x, _| (1.0 + x.abs()).powf(-1.7)).unwrap();
    let r = weighted_norm(&v, 1.7, NormVariant::Inhomogeneous);
    assert!((r.norm - 1.0).abs() < 1e-14);
    // exact ties resolve to the node nearest the origin
    let ones = Field::from_fn(grid.clone(), |_, _| 1.0).unwrap();
    let r = weighted_norm(&ones, 0.0, NormVariant::Inhomogeneous);
    assert_eq!(r.norm, 1.0);
    assert_eq!(r.argmax_point, [0.0, 0.0]);
    let r = weighted_norm(&v, 1.7, NormVariant::Homogeneous);
    assert!(r.norm < 1.0 && r.norm > 0.9);

    let sg = stretched();
    let p = profile_field(&sg, 1.5, 1.0);
    let c = kernel_constants(&KernelParams::new(1.5, 1).unwrap()).unwrap();
    let p0 = StableKernel::new(KernelParams::new(1.5, 1).unwrap()).unwrap().eval_profile(0.0).unwrap();
    let r = weighted_norm(&p, 2.5, NormVariant::Inhomogeneous);
    let brute = sg.as_stretched().unwrap().nodes().iter().zip(&p.values).fold(0.0f64, |m, (x, v)| m.max((1.0 + x.abs()).powf(2.5) * v.abs()));
    assert_eq!(r.norm, brute);
    assert!(r.norm > c.c0 && r.norm > p0, "{r:?}");
    // |x|^θ weighting approaches c0 from above only in the far field
    let h = weighted_norm(&p, 2.5, NormVariant::Homogeneous);
    assert!(h.norm >= c.c0, "{h:?}");
}

#[test]
fn e_norm_examples() {
    let sg = stretched();
    let tab = convolution_table(1.5).unwrap();
    let p = profile_field(&sg, 1.5, 1.0);
    let dp = Field::from_fn(sg.clone(), |x, _| x.signum() * tab.deriv(x.abs())).unwrap();
    let e = e_norm(&p, &[dp.clone()], 1.5).unwrap();
    let parts = weighted_norm(&p, 2.5, NormVariant::Inhomogeneous).norm + weighted_norm(&dp, 3.5, NormVariant::Inhomogeneous).norm;
    assert!(e.is_finite() && e == parts);
    let e3 = e_norm(&p.scaled(3.0), &[dp.scaled(3.0)], 1.5).unwrap();
    assert!((e3 / e - 3.0).abs() < 1e-14);
    // finite differences reproduce the analytic gradient
    let fd = gradient(&p).unwrap();
    let err = fd[0].values.iter().zip(&dp.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-5, "{err}");
}

#[test]
fn stretched_semigroup_matches_kernel_identity() {
    // S(t) P = p(., 1 + t), value and gradient kernels, far field included
    let sg = stretched();
    let tab = convolution_table(1.5).unwrap();
    let p = profile_field(&sg, 1.5, 1.0);
    for &t in &[1e-4, 0.05, 0.5, 3.0] {
        let s = apply_semigroup(&p, 1.5, t).unwrap();
        let g = &apply_semigroup_grad(&p, 1.5, t).unwrap()[0];
        let mut worst = 0.0f64;
        let mut worst_g = 0.0f64;
        for (i, &x) in sg.as_stretched().unwrap().nodes().iter().enumerate() {
            let r = x.abs();
            let exact = tab.kernel(r, 1.0 + t);
            worst = worst.max((s.values[i] - exact).abs() / exact);
            let eg = x.signum() * tab.kernel_deriv(r, 1.0 + t);
            if r > 0.5 && r < 2e3 {
                worst_g = worst_g.max((g.values[i] - eg).abs() / eg.abs());
            }
        }
        assert!(worst < 1e-6, "t = {t}: value {worst}");
        assert!(worst_g < 1e-5, "t = {t}: gradient {worst_g}");
    }
}

#[test]
fn stretched_mass_is_preserved() {
    let sg = stretched();
    let v = Field::from_fn(sg.clone(), |x, _| (-(x - 0.3) * (x - 0.3) * 2.0).exp()).unwrap();
    let m0 = v.integral();
    for &t in &[0.01, 0.3, 2.0] {
        let s = apply_semigroup(&v, 1.5, t).unwrap();
        assert!((s.integral() / m0 - 1.0).abs() < 1e-6, "{t}: {}", s.integral() / m0);
    }
}

#[test]
fn st1_constant_from_delta() {
    let grid = SpatialGrid::uniform(1, 1 << 14, 200.0).unwrap();
    let p0 = StableKernel::new(KernelParams::new(1.5, 1).unwrap()).unwrap().eval_profile(0.0).unwrap();
    let rep = verify_semigroup_bounds(&delta(&grid), 1.5, &[0.5, 1.0, 2.0, 4.0], false).unwrap();
    let c = rep.get("St1").unwrap().constant;
    assert!((c / p0 - 1.0).abs() < 0.05, "{c} vs {p0}");
}

#[test]
fn st2_for_profile_data() {
    let sg = stretched();
    let p = profile_field(&sg, 1.5, 1.0);
    let times = [0.25, 0.5, 1.0, 2.0, 4.0];
    let rep = verify_semigroup_bounds(&p, 1.5, &times, true).unwrap();
    let st2 = rep.get("St2").unwrap();
    assert!(st2.constant <= 1.1, "{st2:?}");
    let long = verify_semigroup_bounds(&p, 1.5, &[0.25, 0.5, 1.0, 2.0, 4.0, 8.0], false).unwrap();
    let c2 = long.get("St2").unwrap().constant;
    assert!((c2 / st2.constant - 1.0).abs() < 0.05);
    for e in &rep.estimates {
        assert!(e.constant.is_finite() && e.constant > 0.0, "{e:?}");
    }
}

fn bumps(grid: &Arc<SpatialGrid>, spec: &[(f64, f64, f64)]) -> Field {
    Field::from_fn(grid.clone(), |x, _| spec.iter().map(|&(a, c, w)| a * (-(x - c) * (x - c) / (w * w)).exp()).sum()).unwrap()
}

fn big_grid() -> Arc<SpatialGrid> {
    SpatialGrid::uniform(1, 1 << 14, 1000.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn mass_preservation(spec in prop::collection::vec((-1.0f64..1.0, -20.0f64..20.0, 0.5f64..4.0), 1..5), t in 0.01f64..5.0, a in 1.1f64..1.9) {
        let grid = SpatialGrid::uniform(1, 4096, 100.0).unwrap();
        let v = bumps(&grid, &spec);
        let s = apply_semigroup(&v, a, t).unwrap();
        let m0: f64 = v.values.iter().sum();
        let m1: f64 = s.values.iter().sum();
        let scale: f64 = v.values.iter().map(|x| x.abs()).sum();
        prop_assert!((m1 - m0).abs() <= 1e-12 * scale);
    }

    #[test]
    fn max_principle_and_st1(spec in prop::collection::vec((-1.0f64..1.0, -30.0f64..30.0, 0.5f64..4.0), 1..5), t in 0.3f64..3.0) {
        let grid = big_grid();
        let a = 1.5;
        let v = bumps(&grid, &spec);
        let s = apply_semigroup(&v, a, t).unwrap();
        let p0 = convolution_table(a).unwrap().value(0.0);
        let bound = (p0 * t.powf(-1.0 / a) * v.lp_norm(1.0)).min(v.sup_norm());
        prop_assert!(s.sup_norm() <= v.sup_norm() * (1.0 + 1e-12));
        prop_assert!(s.sup_norm() <= bound * (1.0 + 1e-6));
    }

    #[test]
    fn translation_commutes(spec in prop::collection::vec((-1.0f64..1.0, -10.0f64..10.0, 0.5f64..3.0), 1..4), m in 1usize..200, t in 0.05f64..2.0) {
        let grid = SpatialGrid::uniform(1, 1024, 40.0).unwrap();
        let v = bumps(&grid, &spec);
        let n = grid.len();
        let shift = |f: &[f64]| (0..n).map(|i| f[(i + n - m) % n]).collect::<Vec<_>>();
        let a = apply_semigroup(&v.with_values(shift(&v.values)), 1.6, t).unwrap();
        let b = shift(&apply_semigroup(&v, 1.6, t).unwrap().values);
        let scale = v.sup_norm();
        for (x, y) in a.values.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-13 * scale);
        }
    }
}
