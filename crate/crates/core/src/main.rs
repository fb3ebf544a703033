use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mppfv::harness::{self, RunConfig};
use mppfv::{Error, Result};

/// Bound-preserving finite volume benchmarks for scalar convection-diffusion.
#[derive(Parser, Debug)]
#[command(name = "mppfv", version, allow_negative_numbers = true)]
struct Cli {
    /// key=value file applied before the flags; `[section]`s define one run each.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Diffusion coefficient for problems with a free ε.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    ny: Option<String>,
    /// low-be, be, sdirk5 or iex<p>.
    #[arg(long)]
    scheme: Option<String>,
    /// none, fct or gmc.
    #[arg(long)]
    limiter: Option<String>,
    #[arg(long = "fct-iters")]
    fct_iters: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// κ in Δt = κ Δx.
    #[arg(long = "dt-factor")]
    dt_factor: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    /// fresh-jacobian or frozen-jacobian.
    #[arg(long)]
    solver: Option<String>,
    /// Output directory for snapshots and tables.
    #[arg(long)]
    out: Option<String>,
    /// Cells per axis of a convergence study, e.g. 25,50,100.
    #[arg(long)]
    study: Option<String>,
    #[arg(long = "snapshot-times")]
    snapshot_times: Option<String>,
    /// Limit every stage of a DIRK step as well as the step.
    #[arg(long = "limit-stages")]
    limit_stages: bool,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs = [
            ("problem", &self.problem),
            ("epsilon", &self.epsilon),
            ("nx", &self.nx),
            ("ny", &self.ny),
            ("scheme", &self.scheme),
            ("limiter", &self.limiter),
            ("fct-iters", &self.fct_iters),
            ("gamma", &self.gamma),
            ("dt-factor", &self.dt_factor),
            ("t-final", &self.t_final),
            ("solver", &self.solver),
            ("out", &self.out),
            ("study", &self.study),
            ("snapshot-times", &self.snapshot_times),
        ];
        let mut out: Vec<_> = pairs.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect();
        if self.limit_stages {
            out.push(("limit-stages", "true"));
        }
        out
    }
}

fn fmt_e1(e1: Option<f64>) -> String {
    e1.map_or_else(|| "n/a".into(), |e| format!("{e:.6e}"))
}

fn fmt_finite(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else {
        "n/a".into()
    }
}

fn execute(config: &RunConfig) -> Result<()> {
    let label = config.label.as_deref().map(|l| format!("[{l}] ")).unwrap_or_default();
    if !config.study.is_empty() {
        let rows = harness::convergence_study(config)?;
        let csv = harness::study_csv(config, &rows);
        if let Some(dir) = &config.out {
            std::fs::create_dir_all(dir)?;
            let name = match &config.label {
                Some(l) => format!("study_{l}.csv"),
                None => format!("study_{}_{}.csv", config.scheme.name(), harness::run::limiter_name(config.limiter)),
            };
            std::fs::write(dir.join(name), &csv)?;
        }
        print!("{label}{csv}");
        return Ok(());
    }
    let o = harness::run(config)?;
    let d = &o.diagnostics;
    println!(
        "{label}problem={} scheme={} limiter={} cells={}x{} steps={} t={} e1={} delta={:.6e} stage_delta={} min={:.17e} max={:.17e} mass_drift={:.3e} newton_iters={} limiter_sweeps={}",
        o.config.problem,
        o.config.scheme.name(),
        harness::run::limiter_name(o.config.limiter),
        o.cells[0],
        o.cells[1],
        o.steps,
        o.final_time,
        fmt_e1(o.e1),
        d.delta,
        fmt_finite(d.stage_delta),
        d.min_seen,
        d.max_seen,
        d.mass_drift(),
        o.stats.stage.iterations,
        o.stats.limiter.iterations,
    );
    Ok(())
}

fn main_inner(cli: &Cli) -> Result<()> {
    let runs = match &cli.config {
        Some(path) => harness::load_config(path, &RunConfig::default())?,
        None => vec![RunConfig::default()],
    };
    let overrides = cli.overrides();
    for mut config in runs {
        for (k, v) in &overrides {
            config.set(k, v).map_err(|e| match e {
                Error::Config(m) => Error::InvalidArgument(format!("--{k}: {m}")),
                other => other,
            })?;
        }
        execute(&config)?;
    }
    Ok(())
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let message = message.trim().replace('\n', " ");
    eprintln!("error kind={kind} message={message}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            return fail("invalid-argument", first.strip_prefix("error: ").unwrap_or(first));
        }
    };
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
