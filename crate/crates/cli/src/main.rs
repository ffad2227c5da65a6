use clap::{Parser, Subcommand};
use fracconv_cli::{run_validated, validate_config_as, ExperimentConfig, ExperimentKind, RunOptions, ValidatedConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracconv", version, about = "Stable kernels, fractal conservation laws and far-field asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment config; defaults are used when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output root (overrides `output.dir`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads (default: available cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// run twice with different worker counts and compare the data files
    #[arg(long, global = true)]
    seed_check: bool,
    /// only print the final summary
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// tabulate the stable profile (and compare with closed forms at alpha = 1, 2)
    Kernel,
    /// integrate the Cauchy problem and write snapshots
    Solve,
    /// far-field expansion check of a solution
    Asymptotics,
    /// build and check a self-similar profile
    Selfsim,
    /// run the acceptance suite
    Acceptance,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Kernel => ExperimentKind::Kernel,
            Command::Solve => ExperimentKind::Solve,
            Command::Asymptotics => ExperimentKind::Asymptotics,
            Command::Selfsim => ExperimentKind::Selfsim,
            Command::Acceptance => ExperimentKind::Acceptance,
        }
    }
}

fn load(cli: &Cli) -> Result<ValidatedConfig, String> {
    let kind = cli.command.kind();
    match &cli.config {
        Some(p) => {
            let raw = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            validate_config_as(&raw, kind).map_err(|e| format!("{}: {e}", p.display()))
        }
        None => {
            let text = ExperimentConfig::with_kind(kind).to_toml();
            validate_config_as(&text, kind).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let v = match load(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    for w in &v.warnings {
        eprintln!("warning: {w}");
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&v.config.output.dir));
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).max(1);
    let opts = RunOptions { jobs, seed_check: cli.seed_check, quiet: cli.quiet };
    match run_validated(&v, &out, &opts) {
        Ok(o) => {
            for c in &o.report.checks {
                let verdict = if c.verdict() { "ok  " } else if c.gated { "FAIL" } else { "diag" };
                println!("{verdict} {}: measured {:.6e}, predicted {:.6e}, tolerance {:.1e}", c.name, c.measured, c.predicted, c.tolerance);
            }
            for j in &o.report.jobs {
                println!("{} {}", if j.pass { "ok  " } else { "FAIL" }, j.name);
            }
            // without --quiet the suite already streamed these to stderr
            if cli.quiet {
                for c in &o.report.criteria {
                    println!("{}", c.line());
                }
            }
            println!("{} -> {} ({:.1} s)", if o.report.pass { "PASS" } else { "FAIL" }, o.dir.display(), o.report.wall_time_s);
            if o.report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
