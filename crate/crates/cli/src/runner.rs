//! Orchestration: staging directory, worker pool, sweeps and the determinism
//! self-test.

use crate::config::{ExperimentConfig, ExperimentKind, SweepSection, ValidatedConfig};
use crate::io::{compare_trees, write_csv, write_json, write_text, Cell, Staging, TreeComparison};
use crate::report::{Check, RunReport};
use crate::{acceptance, experiments, CliError};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// worker threads for sweeps, acceptance criteria and operator assembly
    pub jobs: usize,
    /// run twice with different worker counts and compare the data files
    pub seed_check: bool,
    /// suppress progress lines on stderr
    pub quiet: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { jobs: 1, seed_check: false, quiet: true }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    /// promoted output directory
    pub dir: PathBuf,
}

pub(crate) fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(pool.install(f))
}

/// Worker count for the repeat run: different from the first one.
pub(crate) fn other_jobs(jobs: usize) -> usize {
    if jobs == 1 {
        2
    } else {
        1
    }
}

/// Writes every artifact of `cfg` into `dir` (no report, no promotion).
pub(crate) fn execute(cfg: &ExperimentConfig, dir: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    write_text(&dir.join("effective-config.toml"), &cfg.to_toml())?;
    if cfg.sweep.alpha.is_empty() {
        return single(cfg, dir, opts);
    }
    let jobs: Vec<Result<RunReport, CliError>> = cfg
        .sweep
        .alpha
        .par_iter()
        .map(|&a| {
            let mut sub = cfg.clone();
            sub.kernel.alpha = a;
            sub.sweep = SweepSection::default();
            sub.name = format!("alpha-{a}");
            let d = dir.join(&sub.name);
            crate::io::mkdir(&d)?;
            write_text(&d.join("effective-config.toml"), &sub.to_toml())?;
            single(&sub, &d, opts)
        })
        .collect();
    let mut rep = RunReport::new(&cfg.name, cfg.kind.as_str());
    for j in jobs {
        rep.jobs.push(j?);
    }
    Ok(rep)
}

fn single(cfg: &ExperimentConfig, dir: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let t0 = Instant::now();
    let mut rep = match cfg.kind {
        ExperimentKind::Kernel => experiments::kernel(cfg, dir)?,
        ExperimentKind::Solve => experiments::solve(cfg, dir)?,
        ExperimentKind::Asymptotics => experiments::asymptotics(cfg, dir)?,
        ExperimentKind::Selfsim => experiments::selfsim(cfg, dir)?,
        ExperimentKind::Acceptance => acceptance::run(cfg, dir, opts)?,
    };
    rep.finish(t0.elapsed().as_secs_f64());
    Ok(rep)
}

pub(crate) fn write_comparison(path: &Path, cmp: &TreeComparison) -> Result<(), CliError> {
    let opt = |v: Option<u64>| -> Cell { v.map(|b| Cell::Int(b as i64)).unwrap_or_else(|| "missing".into()) };
    write_csv(
        path,
        &["file", "bytes_first", "bytes_second", "identical"],
        cmp.files.iter().map(|f| vec![f.path.clone().into(), opt(f.bytes_a), opt(f.bytes_b), (if f.identical { "yes" } else { "no" }).into()]),
    )
}

/// Runs `cfg` under `out_root/<name>`: everything is written to a staging
/// directory that replaces the target only when the run completes. The
/// returned report may still contain failing checks; the error path never
/// leaves files behind.
pub fn run_experiment(cfg: &ExperimentConfig, out_root: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    run_inner(cfg, &[], out_root, opts)
}

/// [`run_experiment`] with the validator's warnings carried into the report.
pub fn run_validated(v: &ValidatedConfig, out_root: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    run_inner(&v.config, &v.warnings, out_root, opts)
}

fn run_inner(cfg: &ExperimentConfig, warnings: &[String], out_root: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let t0 = Instant::now();
    let target = out_root.join(&cfg.name);
    let staging = Staging::new(&target)?;
    let mut report = with_pool(opts.jobs, || execute(cfg, staging.path(), opts))??;
    if opts.seed_check && cfg.kind != ExperimentKind::Acceptance {
        let again = Staging::new(&out_root.join(format!("{}-seed-check", cfg.name)))?;
        let repeat = RunOptions { jobs: other_jobs(opts.jobs), ..opts.clone() };
        with_pool(repeat.jobs, || execute(cfg, again.path(), &repeat))??;
        let cmp = compare_trees(staging.path(), again.path())?;
        report.checks.push(
            Check::flag("seed check: data files bitwise identical", cmp.identical, cmp.files.len() as f64)
                .note(format!("second run with {} worker(s)", repeat.jobs)),
        );
        write_comparison(&staging.path().join("seed-check.csv"), &cmp)?;
    }
    report.warnings = warnings.to_vec();
    report.finish(t0.elapsed().as_secs_f64());
    write_json(&staging.path().join("report.json"), &report)?;
    let dir = staging.promote()?;
    Ok(RunOutcome { report, dir })
}
