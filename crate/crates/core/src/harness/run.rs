//! Time loop, per-step limiting and convergence studies.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fluxes::{Discretization, FaceFluxSet};
use crate::harness::config::{RunConfig, Scheme};
use crate::harness::snapshot::snapshot;
use crate::limiters::{GmcSettings, GmcStageSolver, LimiterKind, StageLimiter, StepLimiter};
use crate::mesh::StructuredGrid;
use crate::metrics::{self, RunDiagnostics};
use crate::par::{self, Exec};
use crate::problems::{self, ProblemSpec};
use crate::solvers::{frozen_state, NewtonSolver, SolverStats, StageSolver};
use crate::tableau::ButcherTableau;
use crate::time_integration::{dirk_step, dirk_step_filtered, iex_step};

/// One accepted time step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub u: Vec<f64>,
    /// Flux with u = u^n - Δt div(flux).
    pub flux: FaceFluxSet,
    /// Intermediate stage values (limited ones when stage limiting is on).
    pub stages: Vec<Vec<f64>>,
}

/// Solver counters of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunStats {
    pub stage: SolverStats,
    pub limiter: SolverStats,
}

/// Advances one scheme/limiter combination on a fixed discretization.
pub struct Stepper {
    scheme: Scheme,
    tableau: Option<ButcherTableau>,
    stage_solver: Box<dyn StageSolver>,
    step_limiter: Option<StepLimiter>,
    stage_limiter: Option<StageLimiter>,
    limiter_stats: SolverStats,
}

fn make_limiter(config: &RunConfig, frozen: f64) -> Option<StepLimiter> {
    match config.limiter {
        LimiterKind::None => None,
        LimiterKind::Fct => Some(StepLimiter::Fct {
            iterations: config.fct_iters,
            low: NewtonSolver::low_order(config.solver, frozen),
        }),
        LimiterKind::Gmc => Some(StepLimiter::Gmc { settings: GmcSettings::new(config.gamma) }),
    }
}

impl Stepper {
    /// `frozen` is the linearization state of the frozen-Jacobian mode.
    pub fn new(config: &RunConfig, frozen: f64) -> Result<Self> {
        let tableau = config.scheme.tableau()?;
        let stage_solver: Box<dyn StageSolver> = match (&config.scheme, config.limiter) {
            (Scheme::LowBe, _) => Box::new(NewtonSolver::low_order(config.solver, frozen)),
            (Scheme::Iex(_), LimiterKind::Gmc) => Box::new(GmcStageSolver::new(config.gamma)),
            _ => Box::new(NewtonSolver::stage(config.solver, frozen)),
        };
        let stage_limiter = match config.scheme {
            Scheme::Dirk(_) if config.limit_stages => make_limiter(config, frozen).map(StageLimiter::new),
            _ => None,
        };
        Ok(Stepper {
            scheme: config.scheme.clone(),
            tableau,
            stage_solver,
            step_limiter: make_limiter(config, frozen),
            stage_limiter,
            limiter_stats: SolverStats::default(),
        })
    }

    /// Step from (u_n, t_n) to t_n + dt.
    pub fn step(&mut self, disc: &Discretization<'_>, u_n: &[f64], dt: f64, t_n: f64) -> Result<StepOutput> {
        let t_next = t_n + dt;
        let high = match &self.scheme {
            Scheme::LowBe => {
                let out = self.stage_solver.solve(disc, u_n, u_n, dt, t_next)?;
                return Ok(StepOutput { u: out.y, flux: out.flux, stages: Vec::new() });
            }
            Scheme::Dirk(_) => {
                let tab = self.tableau.as_ref().expect("DIRK schemes carry a tableau");
                match self.stage_limiter.as_mut() {
                    Some(f) => dirk_step_filtered(disc, u_n, tab, self.stage_solver.as_mut(), f, dt, t_n)?,
                    None => dirk_step(disc, u_n, tab, self.stage_solver.as_mut(), dt, t_n)?,
                }
            }
            Scheme::Iex(p) => iex_step(disc, u_n, *p, self.stage_solver.as_mut(), dt, t_n)?,
        };
        let stages = high.stages.values;
        match self.step_limiter.as_mut() {
            None => Ok(StepOutput { u: high.u, flux: high.flux, stages }),
            Some(lim) => {
                let out = lim.apply(disc, u_n, &high.flux, dt, t_next)?;
                if matches!(lim, StepLimiter::Gmc { .. }) {
                    self.limiter_stats.record(&out.report);
                }
                Ok(StepOutput { u: out.y, flux: out.flux, stages })
            }
        }
    }

    pub fn stats(&self) -> RunStats {
        let mut limiter = self.limiter_stats;
        if let Some(l) = &self.step_limiter {
            limiter.merge(&l.stats());
        }
        if let Some(s) = &self.stage_limiter {
            limiter.merge(&s.sweeps);
            limiter.merge(&s.limiter.stats());
        }
        RunStats { stage: self.stage_solver.stats(), limiter }
    }
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub cells: [usize; 2],
    /// Smallest grid spacing.
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    /// Σ of the step sizes taken.
    pub final_time: f64,
    pub field: Vec<f64>,
    /// E1 at the final time, when an exact solution exists there.
    pub e1: Option<f64>,
    pub diagnostics: RunDiagnostics,
    pub stats: RunStats,
    pub snapshots: Vec<(f64, PathBuf)>,
}

/// Problem and grid described by a config.
pub fn setup(config: &RunConfig) -> Result<(ProblemSpec, StructuredGrid)> {
    config.validate()?;
    let problem = problems::by_name(&config.problem, config.epsilon)?;
    let ny = if problem.dim == 2 { config.ny.unwrap_or(config.nx) } else { 1 };
    let grid = StructuredGrid::for_problem(&problem, config.nx, ny)?;
    Ok((problem, grid))
}

/// Step size κ min(Δx, Δy).
pub fn nominal_dt(config: &RunConfig, grid: &StructuredGrid) -> f64 {
    let [hx, hy] = grid.spacing();
    let h = if grid.dim() == 2 { hx.min(hy) } else { hx };
    config.dt_factor * h
}

fn time_label(t: f64) -> String {
    format!("{t}").replace('.', "p")
}

/// Runs the time loop of `config`, writing snapshots and the final field
/// under `config.out` when set.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    run_with_exec(config, Exec::auto())
}

pub fn run_with_exec(config: &RunConfig, exec: Exec) -> Result<RunOutcome> {
    let (problem, grid) = setup(config)?;
    let disc = Discretization::new(&grid, &problem)?.with_exec(exec);
    let t_final = config.t_final.unwrap_or(problem.final_time);
    let mut u = problems::initial_field(&problem, &grid).into_values();
    let mut stepper = Stepper::new(config, frozen_state(&u))?;
    // δ covers the computed steps n ≥ 1; the initial averages are not scored.
    let mut diag = RunDiagnostics::new(metrics::total_mass(&u, &grid));

    let mut targets: Vec<f64> = config.snapshot_times.iter().copied().filter(|&s| s > 0.0 && s < t_final).collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let snapshot_at_zero = config.snapshot_times.iter().any(|&s| s == 0.0);
    let snapshot_at_end = config.snapshot_times.iter().any(|&s| s >= t_final);
    if config.snapshot_times.iter().any(|&s| s < 0.0 || s > t_final) {
        return Err(Error::InvalidArgument(format!("snapshot times must lie in [0, {t_final}]")));
    }
    targets.push(t_final);

    let mut snapshots = Vec::new();
    let mut write_snapshot = |t: f64, u: &[f64]| -> Result<()> {
        if let Some(dir) = &config.out {
            let path = dir.join(format!("snapshot_t{}.csv", time_label(t)));
            snapshot(u, &grid, &path)?;
            snapshots.push((t, path));
        }
        Ok(())
    };
    if snapshot_at_zero {
        write_snapshot(0.0, &u)?;
    }

    let dt_nominal = nominal_dt(config, &grid);
    let mut t = 0.0;
    let mut elapsed = 0.0;
    let mut steps = 0;
    for (k, &target) in targets.iter().enumerate() {
        while t < target {
            let remaining = target - t;
            let (dt, t_next) = if remaining <= dt_nominal * (1.0 + 1e-12) {
                (remaining, target)
            } else {
                (dt_nominal, t + dt_nominal)
            };
            let out = stepper.step(&disc, &u, dt, t)?;
            diag.boundary_outflow += dt * disc.boundary_outflow(&out.flux);
            for s in &out.stages {
                metrics::update_stage_delta(&mut diag, s, &problem);
            }
            metrics::update_delta(&mut diag, &out.u, &problem);
            u = out.u;
            t = t_next;
            elapsed += dt;
            steps += 1;
        }
        let is_end = k + 1 == targets.len();
        if !is_end || snapshot_at_end {
            write_snapshot(target, &u)?;
        }
    }

    diag.final_mass = metrics::total_mass(&u, &grid);
    let e1 = if problem.has_exact_solution() && problem.exact_solution(grid.centers()[0], t_final).is_some() {
        let e = metrics::compute_e1(&u, &problem, &grid, t_final)?;
        diag.e1.push((t_final, e));
        Some(e)
    } else {
        None
    };
    if let Some(dir) = &config.out {
        snapshot(&u, &grid, &dir.join("final.csv"))?;
        std::fs::write(dir.join("summary.csv"), summary_csv(config, &grid, e1, &diag, steps, elapsed))?;
    }
    let [hx, hy] = grid.spacing();
    Ok(RunOutcome {
        config: config.clone(),
        cells: grid.cells_per_axis(),
        dx: if grid.dim() == 2 { hx.min(hy) } else { hx },
        dt: dt_nominal,
        steps,
        final_time: elapsed,
        field: u,
        e1,
        diagnostics: diag,
        stats: stepper.stats(),
        snapshots,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6e}"))
}

fn summary_csv(
    config: &RunConfig,
    grid: &StructuredGrid,
    e1: Option<f64>,
    diag: &RunDiagnostics,
    steps: usize,
    t: f64,
) -> String {
    let [nx, ny] = grid.cells_per_axis();
    format!(
        "problem,scheme,limiter,nx,ny,steps,t,e1,delta,stage_delta,min,max,mass_drift\n\
         {},{},{},{nx},{ny},{steps},{t},{},{:.6e},{:.6e},{:.17e},{:.17e},{:.3e}\n",
        config.problem,
        config.scheme.name(),
        limiter_name(config.limiter),
        fmt_opt(e1),
        diag.delta,
        diag.stage_delta,
        diag.min_seen,
        diag.max_seen,
        diag.mass_drift(),
    )
}

pub fn limiter_name(kind: LimiterKind) -> &'static str {
    match kind {
        LimiterKind::None => "none",
        LimiterKind::Fct => "fct",
        LimiterKind::Gmc => "gmc",
    }
}

/// One grid of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub dx: f64,
    pub e1: f64,
    /// Rate against the previous row.
    pub eoc: Option<f64>,
    pub delta: f64,
}

/// Runs `config` on every grid of `config.study` (N cells per axis) and
/// tabulates E1, EOC and δ.
pub fn convergence_study(config: &RunConfig) -> Result<Vec<StudyRow>> {
    if config.study.is_empty() {
        return Err(Error::InvalidArgument("convergence study needs at least one grid".into()));
    }
    let configs: Vec<RunConfig> = config
        .study
        .iter()
        .map(|&n| {
            let mut c = config.clone();
            c.nx = n;
            c.ny = config.ny.map(|_| n);
            c.study.clear();
            c.out = config.out.as_ref().map(|d| d.join(format!("n{n}")));
            c
        })
        .collect();
    // Grids run concurrently; each run is sequential inside.
    let outcomes = par::map_jobs(Exec::auto(), configs, |c| run_with_exec(&c, Exec::Sequential));
    let mut rows: Vec<StudyRow> = Vec::with_capacity(outcomes.len());
    for (n, outcome) in config.study.iter().zip(outcomes) {
        let o = outcome?;
        let e1 = o.e1.ok_or_else(|| Error::NoExactSolution(format!("{} at t = {}", o.config.problem, o.final_time)))?;
        let eoc = rows.last().map(|prev| metrics::eoc(&[prev.e1, e1], &[prev.dx, o.dx]).map(|r| r[0])).transpose()?;
        rows.push(StudyRow { n: *n, dx: o.dx, e1, eoc, delta: o.diagnostics.delta });
    }
    Ok(rows)
}

/// CSV of a study with columns `scheme,limiter,n,dx,e1,eoc,delta`.
pub fn study_csv(config: &RunConfig, rows: &[StudyRow]) -> String {
    let mut s = String::from("scheme,limiter,n,dx,e1,eoc,delta\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.6e},{:.6e},{},{:.6e}",
            config.scheme.name(),
            limiter_name(config.limiter),
            r.n,
            r.dx,
            r.e1,
            r.eoc.map_or_else(String::new, |e| format!("{e:.4}")),
            r.delta
        );
    }
    s
}
