//! The `kernel`, `solve`, `asymptotics` and `selfsim` pipelines.

use crate::config::{ExperimentConfig, GridKind, SolverKind};
use crate::io::{mkdir, write_csv, write_field, write_json, Cell};
use crate::plots::{Axes, Figure, Series};
use crate::report::{Check, RunReport};
use crate::{CliError, Context};
use fracconv::cauchy_solver::{
    decay_report, domination_check, lp, solve_picard, solve_spectral, FluxForm, NonlinearitySpec, PicardParams, SpectralParams,
    Trajectory,
};
use fracconv::farfield::{expansion_prediction, remainder_envelope, verify_expansion, ExpansionReport};
use fracconv::selfsim::{
    domination_constant, negativity, q_tilde_norm_refined, selfsim_expansion_check, selfsim_profile, selfsim_second_term, MassRegime,
    SelfSimParams,
};
use fracconv::{closed_form_oracle, Field, KernelParams, SpatialGrid, StableKernel};
use serde::Serialize;
use std::path::Path;
use std::sync::Arc;

pub(crate) fn grid(cfg: &ExperimentConfig) -> Result<Arc<SpatialGrid>, CliError> {
    let g = &cfg.grid;
    match g.kind {
        GridKind::Stretched => SpatialGrid::stretched(g.h0, g.ratio, g.core, g.r_max).ctx("grid"),
        GridKind::Periodic => SpatialGrid::uniform(g.dim, g.n, g.half_width).ctx("grid"),
    }
}

pub(crate) fn flux(cfg: &ExperimentConfig) -> Result<NonlinearitySpec, CliError> {
    match cfg.flux.form {
        FluxForm::Burgers => NonlinearitySpec::burgers(cfg.flux.b.clone()).ctx("flux"),
        FluxForm::PowerLaw => NonlinearitySpec::power_law(cfg.flux_q(), cfg.flux.b.clone()).ctx("flux"),
    }
}

fn picard(cfg: &ExperimentConfig) -> PicardParams {
    PicardParams { window_const: cfg.time.window_const, first_window: cfg.time.first_window, ..PicardParams::default() }
}

fn diff(a: &Field, b: &Field) -> Field {
    a.with_values(a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect())
}

/// `t` as a file-name fragment.
pub(crate) fn tag(t: f64) -> String {
    format!("{t}").replace('.', "p")
}

#[derive(Serialize)]
struct KernelSummary {
    alpha: f64,
    dim: usize,
    tol: f64,
    c0: f64,
    c1: f64,
    switch_radii: (f64, f64),
}

pub(crate) fn kernel(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, CliError> {
    let k = &cfg.kernel;
    let mut rep = RunReport::new(&cfg.name, "kernel");
    let sk = StableKernel::new(KernelParams::with_tol(k.alpha, k.dim, k.tol).ctx("kernel")?).ctx("kernel")?;
    let radii: Vec<f64> = (0..k.points).map(|i| k.r_max * i as f64 / (k.points - 1) as f64).collect();
    let tab = sk.eval_profile_table(&radii).ctx("kernel: profile table")?;
    write_csv(
        &dir.join("kernel.csv"),
        &["r", "P", "dP", "regime_tag"],
        (0..radii.len()).map(|i| vec![tab.radii[i].into(), tab.values[i].into(), tab.derivatives[i].into(), tab.regime_tags[i].tag().into()]),
    )?;
    let c = sk.constants();
    write_json(
        &dir.join("constants.json"),
        &KernelSummary { alpha: k.alpha, dim: k.dim, tol: k.tol, c0: c.c0, c1: c.c1, switch_radii: sk.switch_radii() },
    )?;
    let shape = tab.check(k.tol);
    rep.checks.push(
        Check::flag("profile positive and decreasing", shape.is_ok(), tab.values.iter().cloned().fold(f64::INFINITY, f64::min))
            .note(shape.err().map(|e| e.to_string()).unwrap_or_default()),
    );
    rep.checks.push(Check::relative("c1 = (alpha + d) c0", (k.alpha + k.dim as f64) * c.c0, c.c1, 1e-12));
    if sk.params().is_oracle_endpoint() {
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for (i, &r) in radii.iter().enumerate() {
            let mut x = vec![0.0; k.dim];
            x[0] = r;
            let o = closed_form_oracle(k.alpha, k.dim, &x).ctx("kernel: closed form")?;
            let rel = (tab.values[i] - o).abs() / o.abs();
            worst = worst.max(rel);
            rows.push(vec![r.into(), tab.values[i].into(), o.into(), rel.into()]);
        }
        write_csv(&dir.join("oracle.csv"), &["r", "P", "oracle", "rel_err"], rows)?;
        rep.checks.push(Check::at_most("closed-form oracle, max relative error", 1e-8, worst));
    }
    Figure {
        csv: "kernel.csv",
        title: &format!("stable profile, alpha = {}, d = {}", k.alpha, k.dim),
        xlabel: "r",
        ylabel: "|P|, |dP|",
        axes: Axes::LogLog,
        series: vec![
            Series { x: "r", y: "P", label: "P", abs: true },
            Series { x: "r", y: "dP", label: "|dP/dr|", abs: true },
        ],
        x_range: None,
    }
    .write(dir, "kernel")?;
    Ok(rep)
}

pub(crate) fn solve_trajectory(cfg: &ExperimentConfig, u0: &Field, f: &NonlinearitySpec) -> Result<Trajectory, CliError> {
    let a = cfg.kernel.alpha;
    let snaps = cfg.snapshot_times();
    match cfg.time.solver {
        SolverKind::Picard => solve_picard(u0, a, f, cfg.time.horizon, picard(cfg), &snaps).ctx("solve: Picard"),
        SolverKind::Spectral => solve_spectral(u0, a, f, cfg.time.horizon, SpectralParams::new(cfg.time.dt), &snaps).ctx("solve: spectral"),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    alpha: f64,
    dim: usize,
    grid: &'static str,
    points: usize,
    flux: &'a NonlinearitySpec,
    initial: &'a fracconv::cauchy_solver::InitialData,
    scheme: &'a fracconv::cauchy_solver::SchemeMeta,
    snapshots: Vec<SnapshotEntry>,
}

#[derive(Serialize)]
struct SnapshotEntry {
    file: String,
    time: f64,
}

pub(crate) fn solve(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, CliError> {
    let a = cfg.kernel.alpha;
    let mut rep = RunReport::new(&cfg.name, "solve");
    let g = grid(cfg)?;
    let f = flux(cfg)?;
    let u0 = cfg.initial.sample(&g, a).ctx("initial data")?;
    let traj = solve_trajectory(cfg, &u0, &f)?;
    let snap_dir = dir.join("snapshots");
    mkdir(&snap_dir)?;
    let mut entries = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("snap_{k:04}.csv");
        write_field(&snap_dir.join(&name), s)?;
        entries.push(SnapshotEntry { file: format!("snapshots/{name}"), time: s.time });
    }
    write_json(
        &dir.join("manifest.json"),
        &Manifest {
            alpha: a,
            dim: g.dim(),
            grid: g.kind(),
            points: g.len(),
            flux: &f,
            initial: &cfg.initial,
            scheme: &traj.meta,
            snapshots: entries,
        },
    )?;
    let ps = [1.0, 2.0, f64::INFINITY];
    write_csv(
        &dir.join("norms.csv"),
        &["t", "mass", "L1", "L2", "Linf"],
        traj.snapshots.iter().map(|s| {
            let mut r: Vec<Cell> = vec![s.time.into(), s.integral().into()];
            r.extend(ps.iter().map(|&p| Cell::Num(lp(s, p))));
            r
        }),
    )?;
    let m0 = u0.integral();
    let drift = (traj.snapshots.last().unwrap().integral() - m0).abs() / m0.abs().max(f64::MIN_POSITIVE);
    let mass_tol = if g.as_uniform().is_some() { 1e-10 } else { 1e-6 };
    rep.checks.push(Check::at_most("relative mass drift", mass_tol, drift));
    for &p in &ps {
        let norms: Vec<f64> = traj.snapshots.iter().map(|s| lp(s, p)).collect();
        let inc = norms.windows(2).map(|w| (w[1] - w[0]) / w[0].max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        rep.checks.push(Check::at_most(&format!("L{p} norm non-increasing (largest relative step increase)"), 1e-9, inc));
    }
    if let Ok(dec) = decay_report(&traj, a, &[f64::INFINITY]) {
        let e = &dec.entries[0];
        rep.checks.push(
            Check::absolute("decay slope of the sup norm over the last decade", e.predicted_slope, e.slope, 0.05)
                .diagnostic()
                .note("large-time rate; meaningful once the window is far past the initial layer"),
        );
    }
    if g.dim() == 1 && !f.is_linear() {
        let dom = domination_check(&traj, a, &f).ctx("domination")?;
        rep.checks.push(
            Check::flag("kernel domination constant finite", dom.constant.is_finite(), dom.constant)
                .diagnostic()
                .note(if dom.outside_hypotheses { "q below the critical exponent: outside the domination hypotheses" } else { "" }),
        );
    }
    Figure {
        csv: "norms.csv",
        title: "Lp norms",
        xlabel: "t",
        ylabel: "norm",
        axes: Axes::LogLog,
        series: vec![
            Series { x: "t", y: "L1", label: "L1", abs: false },
            Series { x: "t", y: "L2", label: "L2", abs: false },
            Series { x: "t", y: "Linf", label: "Linf", abs: false },
        ],
        x_range: None,
    }
    .write(dir, "decay")?;
    Ok(rep)
}

/// Writes `x, u, prediction, remainder` at time `t` and returns the check rows.
pub(crate) fn expansion_at(
    dir: &Path,
    u0: &Field,
    traj: &Trajectory,
    alpha: f64,
    f: &NonlinearitySpec,
    t: f64,
    window: [f64; 2],
    variant: fracconv::farfield::RemainderVariant,
    coeff_tol: f64,
    exponent_tol: f64,
) -> Result<(ExpansionReport, Vec<Check>), CliError> {
    let ctx = format!("far-field expansion at t = {t}");
    let rep = verify_expansion(u0, traj, alpha, f, t, window, variant).ctx(&ctx)?;
    let pred = expansion_prediction(u0, traj, alpha, f, t).ctx(&ctx)?;
    let u = traj.at(t).ok_or_else(|| CliError::Internal(format!("no snapshot at t = {t}")))?;
    let g = u.grid.clone();
    write_csv(
        &dir.join(format!("farfield_t{}.csv", tag(t))),
        &["x", "u", "prediction", "remainder"],
        (0..g.len()).map(|i| {
            let (uv, pv) = (u.values[i], pred.total.values[i]);
            vec![g.x(i).into(), uv.into(), pv.into(), (uv - pv).into()]
        }),
    )?;
    write_json(&dir.join(format!("expansion_t{}.json", tag(t))), &rep)?;
    let mut checks = vec![Check::relative(
        &format!("second-order coefficient at t = {t}"),
        rep.second_order_coeff_predicted,
        rep.second_order_coeff_fitted,
        coeff_tol,
    )
    .note(format!("standard error {:.3e}", rep.coeff_std_error))];
    checks.push(Check::flag(&format!("second-order sign at t = {t}"), rep.sign_agrees, rep.second_order_coeff_fitted));
    if let Some(fit) = &rep.remainder_fit {
        checks.push(
            Check::at_most(&format!("remainder tail exponent at t = {t}"), -rep.remainder_exponent_predicted + exponent_tol, fit.exponent)
                .note(format!("predicted -{}", rep.remainder_exponent_predicted)),
        );
    }
    Figure {
        csv: &format!("farfield_t{}.csv", tag(t)),
        title: &format!("far field at t = {t}"),
        xlabel: "x",
        ylabel: "|value|",
        axes: Axes::LogLog,
        series: vec![
            Series { x: "x", y: "u", label: "u", abs: true },
            Series { x: "x", y: "remainder", label: "remainder", abs: true },
        ],
        x_range: Some([1.0, window[1]]),
    }
    .write(dir, &format!("farfield_t{}", tag(t)))?;
    Ok((rep, checks))
}

pub(crate) fn envelope(
    dir: &Path,
    u0: &Field,
    traj: &Trajectory,
    alpha: f64,
    f: &NonlinearitySpec,
    times: &[f64],
    window: [f64; 2],
    order: f64,
    factor: f64,
) -> Result<Vec<Check>, CliError> {
    let env = remainder_envelope(u0, traj, alpha, f, times, window, order).ctx("remainder envelope")?;
    let (t0, e0) = (env.times[0], env.envelope[0]);
    write_csv(
        &dir.join("envelope.csv"),
        &["t", "envelope", "relative_envelope", "cubic_bound"],
        env.times.iter().zip(&env.envelope).map(|(&t, &e)| vec![t.into(), e.into(), (e / e0).into(), ((1.0 + t) / (1.0 + t0)).powi(3).into()]),
    )?;
    write_json(&dir.join("envelope.json"), &env)?;
    Figure {
        csv: "envelope.csv",
        title: "remainder envelope",
        xlabel: "t",
        ylabel: "E(t)/E(t0)",
        axes: Axes::LogLog,
        series: vec![
            Series { x: "t", y: "relative_envelope", label: "measured", abs: false },
            Series { x: "t", y: "cubic_bound", label: "((1+t)/(1+t0))^3", abs: false },
        ],
        x_range: None,
    }
    .write(dir, "envelope")?;
    Ok(vec![
        Check::at_most("remainder envelope growth relative to (1+t)^3", factor, env.worst_cubic_ratio)
            .note(format!("order {order}, times {times:?}")),
        Check::at_most("fitted envelope growth exponent N", 3.0, env.fitted_n).diagnostic(),
    ])
}

pub(crate) fn asymptotics(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, CliError> {
    let a = cfg.kernel.alpha;
    let mut rep = RunReport::new(&cfg.name, "asymptotics");
    let g = grid(cfg)?;
    let f = flux(cfg)?;
    let u0 = cfg.initial.sample(&g, a).ctx("initial data")?;
    let traj = solve_trajectory(cfg, &u0, &f)?;
    let fit = &cfg.fit;
    let mut order = None;
    for &t in &fit.times {
        let (r, checks) = expansion_at(dir, &u0, &traj, a, &f, t, fit.window, fit.variant, fit.coeff_tol, fit.exponent_tol)?;
        order = Some(r.remainder_exponent_predicted);
        rep.checks.extend(checks);
    }
    if fit.times.len() >= 2 && !f.is_linear() {
        let mut ts = fit.times.clone();
        ts.sort_by(f64::total_cmp);
        rep.checks.extend(envelope(dir, &u0, &traj, a, &f, &ts, fit.window, order.unwrap(), fit.envelope_factor)?);
    }
    Ok(rep)
}

#[derive(Serialize)]
struct SelfSimSummary<'a> {
    mass: f64,
    alpha: f64,
    b: &'a [f64],
    regime: MassRegime,
    q_tilde_norm: f64,
    q_tilde_norm_refined: f64,
    rate: Option<f64>,
    scaling_residual: Option<f64>,
    gradient_sup: f64,
    domination_constant: f64,
    negativity: f64,
    mass_measured: f64,
    iterates: &'a [fracconv::selfsim::RescaledIterate],
    #[serde(skip_serializing_if = "Option::is_none")]
    expansion: Option<&'a ExpansionReport>,
}

pub(crate) fn selfsim_run(
    dir: &Path,
    mass: f64,
    alpha: f64,
    b: &[f64],
    lambdas: &[f64],
    g: &Arc<SpatialGrid>,
    params: &SelfSimParams,
    expansion: Option<([f64; 2], f64, f64)>,
) -> Result<Vec<Check>, CliError> {
    let prof = selfsim_profile(mass, alpha, 1, b, lambdas, g, params).ctx("self-similar profile")?;
    let second = selfsim_second_term(&prof).ctx("self-similar second-order term")?;
    let mp = diff(&prof.profile, &prof.nonlinear_part);
    let rem = diff(&prof.nonlinear_part, &second);
    write_csv(
        &dir.join("profile.csv"),
        &["x", "U_M", "M_P", "second_order", "remainder"],
        (0..g.len()).map(|i| vec![g.x(i).into(), prof.profile.values[i].into(), mp.values[i].into(), second.values[i].into(), rem.values[i].into()]),
    )?;
    write_csv(
        &dir.join("iterates.csv"),
        &["lambda", "mass", "relative_change"],
        prof.iterates.iter().map(|it| vec![it.lambda.into(), it.mass.into(), it.relative_change.into()]),
    )?;
    let neg = negativity(&prof);
    let dom = domination_constant(&prof);
    let measured_mass = prof.profile.integral();
    let conj = if prof.regime == MassRegime::Conjectural { "mass above the smallness gate: conjectural regime" } else { "" };
    let mut checks = vec![
        Check::at_most("U_M nonnegative (largest negative value relative to sup)", 1e-10, neg),
        Check::relative("mass of U_M", mass, measured_mass, 0.01),
        Check::flag("U_M / P_alpha bounded", dom.is_finite() && dom > 0.0, dom).note(conj),
        Check::flag("mass below the smallness gate", prof.regime == MassRegime::Small, mass).diagnostic(),
        Check::flag("gradient sup finite (conjectured bound, not gated)", prof.gradient_sup.is_finite(), prof.gradient_sup).diagnostic(),
    ];
    if let Some(r) = prof.scaling_residual {
        checks.push(Check::at_most("scaling self-test residual", 1e-2, r).diagnostic());
    }
    let refined = q_tilde_norm_refined(&prof, 4);
    checks.push(Check::relative("critical norm stable under quadrature refinement", refined, prof.q_tilde_norm, 5e-3).diagnostic());
    let mut exp_rep = None;
    if let Some((window, coeff_tol, exponent_tol)) = expansion {
        let r = selfsim_expansion_check(&prof, window).ctx("self-similar expansion")?;
        checks.push(Check::relative("second-order coefficient of U_M", r.second_order_coeff_predicted, r.second_order_coeff_fitted, coeff_tol));
        if let Some(fit) = &r.remainder_fit {
            checks.push(
                Check::at_most("remainder tail exponent of U_M", -r.remainder_exponent_predicted + exponent_tol, fit.exponent)
                    .note(format!("predicted -{}", r.remainder_exponent_predicted)),
            );
        }
        exp_rep = Some(r);
    }
    write_json(
        &dir.join("selfsim.json"),
        &SelfSimSummary {
            mass,
            alpha,
            b,
            regime: prof.regime,
            q_tilde_norm: prof.q_tilde_norm,
            q_tilde_norm_refined: refined,
            rate: prof.rate,
            scaling_residual: prof.scaling_residual,
            gradient_sup: prof.gradient_sup,
            domination_constant: dom,
            negativity: neg,
            mass_measured: measured_mass,
            iterates: &prof.iterates,
            expansion: exp_rep.as_ref(),
        },
    )?;
    Figure {
        csv: "profile.csv",
        title: &format!("self-similar profile, M = {mass}, alpha = {alpha}"),
        xlabel: "x",
        ylabel: "|value|",
        axes: Axes::LogLog,
        series: vec![
            Series { x: "x", y: "U_M", label: "U_M", abs: true },
            Series { x: "x", y: "M_P", label: "M P_alpha", abs: true },
            Series { x: "x", y: "second_order", label: "second-order term", abs: true },
            Series { x: "x", y: "remainder", label: "remainder", abs: true },
        ],
        x_range: Some([0.1, g.as_stretched().map(|s| s.r_max).unwrap_or(1e3)]),
    }
    .write(dir, "profile")?;
    Ok(checks)
}

pub(crate) fn selfsim(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, CliError> {
    let s = &cfg.selfsim;
    let a = cfg.kernel.alpha;
    let mut rep = RunReport::new(&cfg.name, "selfsim");
    let g = grid(cfg)?;
    let params = SelfSimParams {
        bump_width: s.bump_width,
        smallness_gate: s.smallness_gate,
        convergence_tol: s.convergence_tol,
        ..SelfSimParams::default()
    };
    // the expansion hypothesis fails for alpha ≤ √2; the validator warns and the check is skipped
    let expansion = (s.expansion_check && a > 2f64.sqrt()).then_some((s.window, cfg.fit.coeff_tol, cfg.fit.exponent_tol));
    rep.checks = selfsim_run(dir, s.mass, a, &cfg.flux.b, &s.lambdas, &g, &params, expansion)?;
    Ok(rep)
}
