//! Experiment configuration: TOML text, serde defaults, and a validator that
//! reports every violation with its field path. The grammar is documented in
//! `docs/config.md` at the workspace root.

use fracconv::cauchy_solver::{FluxForm, InitialData};
use fracconv::farfield::RemainderVariant;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Kernel,
    Solve,
    Asymptotics,
    Selfsim,
    Acceptance,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Kernel => "kernel",
            ExperimentKind::Solve => "solve",
            ExperimentKind::Asymptotics => "asymptotics",
            ExperimentKind::Selfsim => "selfsim",
            ExperimentKind::Acceptance => "acceptance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub flux: FluxSection,
    #[serde(default = "default_initial")]
    pub initial: InitialData,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub selfsim: SelfSimSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub acceptance: AcceptanceSection,
}

fn default_name() -> String {
    "run".into()
}

fn default_initial() -> InitialData {
    InitialData::ScaledProfile { amplitude: 0.5 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

/// Stability index and kernel tabulation. `alpha` is the index for every kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub alpha: f64,
    pub dim: usize,
    pub tol: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection { alpha: 1.5, dim: 1, tol: 1e-8, r_max: 50.0, points: 201 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Stretched,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub kind: GridKind,
    /// stretched: core spacing, growth ratio, core half-width, outer radius
    pub h0: f64,
    pub ratio: f64,
    pub core: f64,
    pub r_max: f64,
    /// periodic: dimension, points per axis, half-width
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { kind: GridKind::Stretched, h0: 0.05, ratio: 1.02, core: 8.0, r_max: 2e4, dim: 1, n: 2048, half_width: 51.2 }
    }
}

impl GridSection {
    pub fn dimension(&self) -> usize {
        match self.kind {
            GridKind::Stretched => 1,
            GridKind::Periodic => self.dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluxSection {
    pub form: FluxForm,
    /// exponent of the power-law form; the Burgers form fixes q = 2
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    pub b: Vec<f64>,
}

impl Default for FluxSection {
    fn default() -> Self {
        FluxSection { form: FluxForm::Burgers, q: None, b: vec![1.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Picard,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub horizon: f64,
    /// uniform snapshot spacing, merged with `snapshots`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_step: Option<f64>,
    pub snapshots: Vec<f64>,
    pub solver: SolverKind,
    /// spectral time step
    pub dt: f64,
    /// Picard window constant and optional first window
    pub window_const: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_window: Option<f64>,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            horizon: 1.0,
            snapshot_step: None,
            snapshots: Vec::new(),
            solver: SolverKind::Picard,
            dt: 2e-3,
            window_const: 0.25,
            first_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub window: [f64; 2],
    pub times: Vec<f64>,
    pub variant: RemainderVariant,
    /// relative tolerance on the second-order coefficient
    pub coeff_tol: f64,
    /// one-sided slack on the remainder exponent
    pub exponent_tol: f64,
    /// bound on E(t)/E(t₀) / ((1+t)/(1+t₀))³
    pub envelope_factor: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            window: [50.0, 2000.0],
            times: vec![1.0],
            variant: RemainderVariant::I,
            coeff_tol: 0.1,
            exponent_tol: 0.25,
            envelope_factor: 1.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelfSimSection {
    pub mass: f64,
    pub lambdas: Vec<f64>,
    pub window: [f64; 2],
    pub smallness_gate: f64,
    pub convergence_tol: f64,
    pub bump_width: f64,
    pub expansion_check: bool,
}

impl Default for SelfSimSection {
    fn default() -> Self {
        SelfSimSection {
            mass: 0.1,
            lambdas: vec![2.0, 4.0, 8.0, 16.0],
            window: [20.0, 300.0],
            smallness_gate: 0.2,
            convergence_tol: 0.01,
            bump_width: 1.0,
            expansion_check: true,
        }
    }
}

/// Runs the experiment once per listed α, each in its own subdirectory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcceptanceSection {
    /// criterion numbers to run; empty means all
    pub criteria: Vec<u32>,
    /// repeat the suite and compare data files (criterion 11)
    pub determinism: bool,
}

impl Default for AcceptanceSection {
    fn default() -> Self {
        AcceptanceSection { criteria: Vec::new(), determinism: true }
    }
}

/// One problem found while reading a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// dotted field path, or empty for syntax errors
    pub field: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}")?;
            if let Some(c) = self.column {
                write!(f, ", column {c}")?;
            }
            write!(f, ": ")?;
        }
        if !self.field.is_empty() {
            write!(f, "{}: ", self.field)?;
        }
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<Violation>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem{}):", self.0.len(), if self.0.len() == 1 { "" } else { "s" })?;
        for v in &self.0 {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    /// Defaults for `kind` with nothing else set.
    pub fn with_kind(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            name: default_name(),
            output: OutputSection::default(),
            kernel: KernelSection::default(),
            grid: GridSection::default(),
            flux: FluxSection::default(),
            initial: default_initial(),
            time: TimeSection::default(),
            fit: FitSection::default(),
            selfsim: SelfSimSection::default(),
            sweep: SweepSection::default(),
            acceptance: AcceptanceSection::default(),
        }
    }

    /// Text of the effective configuration with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configs always serialize")
    }

    /// Flux exponent after applying the form's rule.
    pub fn flux_q(&self) -> f64 {
        match self.flux.form {
            FluxForm::Burgers => 2.0,
            FluxForm::PowerLaw => self.flux.q.unwrap_or(2.0),
        }
    }

    /// Snapshot times: the listed ones, the uniform step, fit times and the horizon.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let h = self.time.horizon;
        let mut ts: Vec<f64> = self.time.snapshots.clone();
        if let Some(s) = self.time.snapshot_step {
            let k = (h / s + 1e-9).floor() as usize;
            ts.extend((1..=k).map(|i| i as f64 * s));
        }
        if self.kind == ExperimentKind::Asymptotics {
            ts.extend(self.fit.times.iter().copied());
        }
        ts.push(h);
        ts.retain(|&t| t > 0.0 && t <= h * (1.0 + 1e-12));
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        ts
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map(|s| s.chars().count()).unwrap_or(0) + 1;
    (line, col)
}

/// Parses and validates config text. Syntax and unknown-key errors carry
/// line and column; domain checks are all run and reported together.
pub fn validate_config(raw: &str) -> Result<ValidatedConfig, ConfigErrors> {
    let cfg: ExperimentConfig = match toml::from_str(raw) {
        Ok(c) => c,
        Err(e) => {
            let (line, column) = match e.span() {
                Some(s) => {
                    let (l, c) = line_col(raw, s.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            let field = field_near(raw, e.span().map(|s| s.start));
            return Err(ConfigErrors(vec![Violation { field, line, column, message: e.message().to_string() }]));
        }
    };
    let mut v = Checker { raw, out: Vec::new(), warnings: Vec::new() };
    v.check(&cfg);
    if v.out.is_empty() {
        Ok(ValidatedConfig { config: cfg, warnings: v.warnings })
    } else {
        Err(ConfigErrors(v.out))
    }
}

/// Like [`validate_config`], for a subcommand that fixes the kind: a missing
/// top-level `kind` defaults to it, a different one is an error.
pub fn validate_config_as(raw: &str, kind: ExperimentKind) -> Result<ValidatedConfig, ConfigErrors> {
    let has_kind = raw.parse::<toml::Table>().map(|t| t.contains_key("kind")).unwrap_or(true);
    let v = if has_kind {
        validate_config(raw)?
    } else {
        let text = format!("kind = \"{}\"\n{raw}", kind.as_str());
        validate_config(&text).map_err(|mut e| {
            for v in &mut e.0 {
                v.line = v.line.map(|l| l.saturating_sub(1)).filter(|&l| l > 0);
            }
            e
        })?
    };
    if v.config.kind != kind {
        let line = raw.lines().position(|l| l.trim_start().starts_with("kind")).map(|i| i + 1);
        return Err(ConfigErrors(vec![Violation {
            field: "kind".into(),
            line,
            column: None,
            message: format!("config is for `{}` but the subcommand is `{}`", v.config.kind.as_str(), kind.as_str()),
        }]));
    }
    Ok(v)
}

/// Dotted path of the key on the line holding `offset`, using the last table header above it.
fn field_near(raw: &str, offset: Option<usize>) -> String {
    let Some(off) = offset else { return String::new() };
    let (line, _) = line_col(raw, off);
    let mut table = String::new();
    let mut key = String::new();
    for (i, l) in raw.lines().enumerate() {
        let t = l.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        if i + 1 == line {
            if let Some((k, _)) = t.split_once('=') {
                key = k.trim().to_string();
            }
            break;
        }
    }
    match (table.is_empty(), key.is_empty()) {
        (_, true) => table,
        (true, false) => key,
        (false, false) => format!("{table}.{key}"),
    }
}

struct Checker<'a> {
    raw: &'a str,
    out: Vec<Violation>,
    warnings: Vec<String>,
}

fn finite_pos(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl Checker<'_> {
    /// Line of `key` inside `[table]` (or at top level), when written explicitly.
    fn locate(&self, field: &str) -> Option<usize> {
        let (table, key) = match field.rsplit_once('.') {
            Some((t, k)) => (t, k),
            None => ("", field),
        };
        let mut current = String::new();
        for (i, l) in self.raw.lines().enumerate() {
            let t = l.trim();
            if t.starts_with('[') {
                current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
                if key.is_empty() && current == table {
                    return Some(i + 1);
                }
                continue;
            }
            if current == table {
                if let Some((k, _)) = t.split_once('=') {
                    if k.trim() == key {
                        return Some(i + 1);
                    }
                }
            }
        }
        None
    }

    fn err(&mut self, field: &str, message: impl Into<String>) {
        let line = self.locate(field);
        self.out.push(Violation { field: field.into(), line, column: None, message: message.into() });
    }

    fn alpha_rule(&mut self, field: &str, a: f64, kernel_kind: bool) {
        let open = a.is_finite() && a > 1.0 && a < 2.0;
        if kernel_kind {
            if !(open || a == 1.0 || a == 2.0) {
                self.err(field, format!("alpha must lie in (1,2) or equal a closed-form endpoint 1 or 2, got {a}"));
            }
        } else if !open {
            self.err(field, format!("alpha must lie in (1,2), got {a}"));
        }
    }

    fn check(&mut self, c: &ExperimentConfig) {
        use ExperimentKind::*;
        if c.name.is_empty() || c.name.contains(['/', '\\']) || c.name.starts_with('.') {
            self.err("name", "name must be a non-empty plain directory name");
        }
        if c.output.dir.is_empty() {
            self.err("output.dir", "output directory must not be empty");
        }
        let is_kernel = c.kind == Kernel;
        self.alpha_rule("kernel.alpha", c.kernel.alpha, is_kernel);
        for (i, &a) in c.sweep.alpha.iter().enumerate() {
            self.alpha_rule(&format!("sweep.alpha[{i}]"), a, is_kernel);
        }
        if c.kind == Acceptance && !c.sweep.alpha.is_empty() {
            self.err("sweep.alpha", "acceptance runs have a fixed parameter set and cannot be swept");
        }
        match c.kind {
            Kernel => self.kernel(c),
            Solve => {
                self.grid(c);
                self.flux(c);
                self.initial(c);
                self.time(c);
                match (c.time.solver, c.grid.kind) {
                    (SolverKind::Picard, GridKind::Periodic) => self.err("time.solver", "the Picard solver runs on the stretched grid"),
                    (SolverKind::Spectral, GridKind::Stretched) => self.err("time.solver", "the spectral solver runs on the periodic grid"),
                    _ => {}
                }
            }
            Asymptotics => {
                self.grid(c);
                self.flux(c);
                self.initial(c);
                self.time(c);
                self.fit(c);
                if c.grid.kind != GridKind::Stretched {
                    self.err("grid.kind", "far-field analysis needs the stretched grid");
                }
                if c.time.solver != SolverKind::Picard {
                    self.err("time.solver", "far-field analysis uses the Picard solver");
                }
                if c.time.snapshot_step.is_none() {
                    self.err("time.snapshot_step", "the mass moment needs a uniform snapshot step (0.05 recommended)");
                }
            }
            Selfsim => {
                self.grid(c);
                if c.grid.kind != GridKind::Stretched {
                    self.err("grid.kind", "self-similar profiles are built on the stretched grid");
                }
                if c.flux.b.len() != 1 || !c.flux.b[0].is_finite() {
                    self.err("flux.b", "self-similar runs take one finite direction component (d = 1)");
                }
                self.selfsim(c);
            }
            Acceptance => {
                for (i, &k) in c.acceptance.criteria.iter().enumerate() {
                    if !(1..=11).contains(&k) {
                        self.err(&format!("acceptance.criteria[{i}]"), format!("criterion {k} does not exist (1 to 11)"));
                    }
                }
            }
        }
    }

    fn kernel(&mut self, c: &ExperimentConfig) {
        let k = &c.kernel;
        if !(1..=3).contains(&k.dim) {
            self.err("kernel.dim", format!("dimension must be 1, 2 or 3, got {}", k.dim));
        }
        if !(k.tol > 0.0 && k.tol <= 1e-3) {
            self.err("kernel.tol", format!("tolerance must lie in (0, 1e-3], got {}", k.tol));
        }
        if !finite_pos(k.r_max) {
            self.err("kernel.r_max", "r_max must be positive and finite");
        }
        if k.points < 2 {
            self.err("kernel.points", "at least two radii are needed");
        }
    }

    fn grid(&mut self, c: &ExperimentConfig) {
        let g = &c.grid;
        match g.kind {
            GridKind::Stretched => {
                if !finite_pos(g.h0) {
                    self.err("grid.h0", "core spacing must be positive");
                }
                if !(g.ratio > 1.0 && g.ratio <= 1.5) {
                    self.err("grid.ratio", format!("growth ratio must lie in (1, 1.5], got {}", g.ratio));
                }
                if !(g.core >= 0.0 && g.core.is_finite()) {
                    self.err("grid.core", "core half-width must be nonnegative");
                }
                if !(g.r_max.is_finite() && g.r_max > g.core.max(0.0) && g.r_max > g.h0) {
                    self.err("grid.r_max", "outer radius must exceed the core half-width");
                }
            }
            GridKind::Periodic => {
                if !(1..=2).contains(&g.dim) {
                    self.err("grid.dim", "periodic grids are one- or two-dimensional");
                }
                if g.n < 16 || !g.n.is_power_of_two() {
                    self.err("grid.n", format!("points per axis must be a power of two, at least 16, got {}", g.n));
                }
                if !finite_pos(g.half_width) {
                    self.err("grid.half_width", "half-width must be positive");
                }
            }
        }
    }

    fn flux(&mut self, c: &ExperimentConfig) {
        let f = &c.flux;
        match (f.form, f.q) {
            (FluxForm::Burgers, Some(q)) if q != 2.0 => self.err("flux.q", format!("the Burgers flux has q = 2, got {q}")),
            (FluxForm::PowerLaw, Some(q)) if !(q > 1.0 && q.is_finite()) => self.err("flux.q", format!("q must exceed 1, got {q}")),
            (FluxForm::PowerLaw, None) => self.err("flux.q", "the power-law form needs an exponent q"),
            _ => {}
        }
        if f.b.is_empty() || f.b.iter().any(|v| !v.is_finite()) {
            self.err("flux.b", "direction b needs finite components");
        } else if f.b.len() != c.grid.dimension() {
            self.err("flux.b", format!("direction has {} components but the grid is {}-dimensional", f.b.len(), c.grid.dimension()));
        }
    }

    fn initial(&mut self, c: &ExperimentConfig) {
        let (amp, width) = match c.initial {
            InitialData::DeltaApprox { mass, width } => (mass, Some(width)),
            InitialData::ScaledProfile { amplitude } => (amplitude, None),
            InitialData::Bump { amplitude, width } => (amplitude, Some(width)),
            InitialData::Algebraic { amplitude } => (amplitude, None),
        };
        if !amp.is_finite() {
            self.err("initial", "amplitude (or mass) must be finite");
        }
        if let Some(w) = width {
            if !finite_pos(w) {
                self.err("initial.width", "width must be positive");
            }
        }
        let kernel_shaped = matches!(c.initial, InitialData::DeltaApprox { .. } | InitialData::ScaledProfile { .. });
        if kernel_shaped && c.grid.dimension() != 1 {
            self.err("initial.kind", "kernel-shaped initial data are available in d = 1");
        }
    }

    fn time(&mut self, c: &ExperimentConfig) {
        let t = &c.time;
        if !finite_pos(t.horizon) {
            self.err("time.horizon", "horizon must be positive and finite");
        }
        if let Some(s) = t.snapshot_step {
            if !finite_pos(s) {
                self.err("time.snapshot_step", "snapshot step must be positive");
            } else if t.horizon / s > 1e5 {
                self.err("time.snapshot_step", "more than 1e5 snapshots requested");
            }
        }
        if let Some(i) = t.snapshots.iter().position(|&s| !(s > 0.0 && s <= t.horizon)) {
            self.err(&format!("time.snapshots[{i}]"), "snapshot times must lie in (0, horizon]");
        }
        if !finite_pos(t.dt) {
            self.err("time.dt", "time step must be positive");
        }
        if !finite_pos(t.window_const) {
            self.err("time.window_const", "window constant must be positive");
        }
        if let Some(w) = t.first_window {
            if !finite_pos(w) {
                self.err("time.first_window", "first window must be positive");
            }
        }
    }

    fn window(&mut self, field: &str, w: [f64; 2]) {
        if !(w[0] > 0.0 && w[1] > w[0] && w[1].is_finite()) {
            self.err(field, format!("window must satisfy 0 < lo < hi, got [{}, {}]", w[0], w[1]));
        }
    }

    fn fit(&mut self, c: &ExperimentConfig) {
        let f = &c.fit;
        self.window("fit.window", f.window);
        if c.grid.kind == GridKind::Stretched && f.window[1] > c.grid.r_max {
            self.err("fit.window", "window reaches beyond the grid");
        }
        if f.times.is_empty() {
            self.err("fit.times", "at least one analysis time is needed");
        }
        if let Some(i) = f.times.iter().position(|&s| !(s > 0.0 && s <= c.time.horizon)) {
            self.err(&format!("fit.times[{i}]"), "analysis times must lie in (0, horizon]");
        }
        if matches!(f.variant, RemainderVariant::SelfsimD1 | RemainderVariant::SelfsimDge2) {
            self.err("fit.variant", "self-similar remainder orders belong to selfsim runs");
        }
        for (name, v) in [("fit.coeff_tol", f.coeff_tol), ("fit.exponent_tol", f.exponent_tol), ("fit.envelope_factor", f.envelope_factor)] {
            if !finite_pos(v) {
                self.err(name, "must be positive");
            }
        }
        // d = 1: q̃ = α
        if c.kernel.alpha > 1.0 && c.kernel.alpha < 2.0 && c.flux_q() <= c.kernel.alpha {
            self.warnings.push(format!(
                "flux.q = {} does not exceed q̃ = {}: the far-field expansion is stated for q > q̃",
                c.flux_q(),
                c.kernel.alpha
            ));
        }
    }

    fn selfsim(&mut self, c: &ExperimentConfig) {
        let s = &c.selfsim;
        if !finite_pos(s.mass) {
            self.err("selfsim.mass", "mass must be positive");
        }
        if s.lambdas.len() < 2 {
            self.err("selfsim.lambdas", "at least two rescaling factors are needed");
        }
        if s.lambdas.iter().any(|&l| !(l >= 1.0 && l.is_finite())) || s.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            self.err("selfsim.lambdas", "rescaling factors must be increasing and at least 1");
        }
        self.window("selfsim.window", s.window);
        if s.window[1] > c.grid.r_max {
            self.err("selfsim.window", "window reaches beyond the grid");
        }
        if !finite_pos(s.smallness_gate) {
            self.err("selfsim.smallness_gate", "gate must be positive");
        }
        if !(s.convergence_tol > 0.0 && s.convergence_tol < 1.0) {
            self.err("selfsim.convergence_tol", "tolerance must lie in (0, 1)");
        }
        if !finite_pos(s.bump_width) {
            self.err("selfsim.bump_width", "bump width must be positive");
        }
        let a = c.kernel.alpha;
        if s.expansion_check && a > 1.0 && a <= 2f64.sqrt() {
            self.warnings.push(format!(
                "selfsim.expansion_check: with d = 1 and alpha = {a} ≤ √2 the hypothesis q̃>q* fails \
                 (q̃ = {:.4}, q* = {:.4}); the expansion check will be skipped",
                a,
                1.0 + 1.0 / (a + 1.0)
            ));
        }
        if s.mass > s.smallness_gate {
            self.warnings.push(format!(
                "selfsim.mass = {} exceeds the smallness gate {}: results are tagged conjectural",
                s.mass, s.smallness_gate
            ));
        }
    }
}
