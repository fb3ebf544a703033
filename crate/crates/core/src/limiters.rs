//! Flux limiters enforcing the global bounds: Zalesak's FCT and the convex
//! (GMC) limiter, plus their stage-wise and semi-discrete variants.

use crate::error::{Error, Result};
use crate::fluxes::{Discretization, FaceFluxSet};
use crate::mesh::StructuredGrid;
use crate::par;
use crate::solvers::anderson::Anderson;
use crate::solvers::{l2, NewtonSolver, SolverReport, SolverStats, StageOutcome, StageSolver};
use crate::time_integration::{flux_update, StageContext, StageFilter};

/// Values within this distance of a bound count as inside it.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimiterKind {
    None,
    Fct,
    Gmc,
}

impl std::str::FromStr for LimiterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(LimiterKind::None),
            "fct" => Ok(LimiterKind::Fct),
            "gmc" => Ok(LimiterKind::Gmc),
            other => Err(Error::UnknownName { kind: "limiter", name: other.to_string() }),
        }
    }
}

/// Per-cell sums and ratios of the Zalesak limiter.
#[derive(Debug, Clone, Default)]
pub struct BoundBudget {
    pub q_minus: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub p_plus: Vec<f64>,
    pub r_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
}

/// Distance from `x` to `bound` that stays infinite for infinite bounds.
#[inline]
fn gap(bound: f64, x: f64) -> f64 {
    if bound.is_infinite() {
        bound
    } else {
        bound - x
    }
}

/// Zalesak coefficients for owner-oriented corrections `dg` with allowances
/// Q⁻ ≤ 0 ≤ Q⁺ per cell.
pub fn zalesak_alphas(
    grid: &StructuredGrid,
    dg: &[f64],
    q_minus: &[f64],
    q_plus: &[f64],
) -> Result<Vec<f64>> {
    Ok(zalesak(grid, dg, q_minus, q_plus)?.0)
}

/// Zalesak coefficients together with the intermediate sums.
pub fn zalesak(
    grid: &StructuredGrid,
    dg: &[f64],
    q_minus: &[f64],
    q_plus: &[f64],
) -> Result<(Vec<f64>, BoundBudget)> {
    let n = grid.num_cells();
    if dg.len() != grid.faces().len() || q_minus.len() != n || q_plus.len() != n {
        return Err(Error::InvalidArgument("limiter input sizes do not match the grid".into()));
    }
    if let Some(i) = (0..n).find(|&i| !(q_minus[i] <= 0.0 && q_plus[i] >= 0.0)) {
        return Err(Error::LimiterPrecondition(format!(
            "cell {i}: Q- = {}, Q+ = {}",
            q_minus[i], q_plus[i]
        )));
    }
    let faces = grid.faces();
    let sums = par::map_indexed(par::Exec::auto(), n, |i| {
        let mut pp = 0.0;
        let mut pm = 0.0;
        for &(fi, sign) in grid.cell_faces(i) {
            let v = faces[fi].area * sign * dg[fi];
            if v > 0.0 {
                pp += v;
            } else {
                pm += v;
            }
        }
        (pp, pm)
    });
    let ratio = |q: f64, p: f64| if p == 0.0 { 1.0 } else { (q / p).min(1.0) };
    let mut b = BoundBudget {
        q_minus: q_minus.to_vec(),
        q_plus: q_plus.to_vec(),
        ..Default::default()
    };
    for (i, &(pp, pm)) in sums.iter().enumerate() {
        b.p_plus.push(pp);
        b.p_minus.push(pm);
        b.r_plus.push(ratio(q_plus[i], pp));
        b.r_minus.push(ratio(q_minus[i], pm));
    }
    let alpha = faces
        .iter()
        .zip(dg)
        .map(|(f, &d)| {
            let (own, nb) = if d >= 0.0 {
                (b.r_plus[f.owner], f.neighbor.cell().map(|j| b.r_minus[j]))
            } else {
                (b.r_minus[f.owner], f.neighbor.cell().map(|j| b.r_plus[j]))
            };
            nb.map_or(own, |r| own.min(r))
        })
        .collect();
    Ok((alpha, b))
}

/// Allowances Q^± = scale (u^{max/min} - reference), clipped to the right
/// sign when the reference sits within [`BOUND_SLACK`] outside the bounds.
fn fct_budgets(
    reference: &[f64],
    u_min: f64,
    u_max: f64,
    scale: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut qm = Vec::with_capacity(reference.len());
    let mut qp = Vec::with_capacity(reference.len());
    for (i, &u) in reference.iter().enumerate() {
        if u < u_min - BOUND_SLACK || u > u_max + BOUND_SLACK || !u.is_finite() {
            return Err(Error::LimiterPrecondition(format!(
                "reference value {u} at cell {i} lies outside [{u_min}, {u_max}]"
            )));
        }
        qm.push((scale * gap(u_min, u)).min(0.0));
        qp.push((scale * gap(u_max, u)).max(0.0));
    }
    Ok((qm, qp))
}

/// Limited correction Σ_j |S_ij| α_ij ΔG_ij / |K_i| per cell.
fn limited_divergence(disc: &Discretization<'_>, alpha: &[f64], dg: &[f64]) -> Vec<f64> {
    let lim: Vec<f64> = alpha.iter().zip(dg).map(|(a, d)| a * d).collect();
    disc.divergence(&lim)
}

/// FCT result with the flux actually applied.
#[derive(Debug, Clone)]
pub struct FctOutcome {
    pub u: Vec<f64>,
    /// G^L - Σ_passes α ΔG, so that u = u^n - Δt div(flux).
    pub flux: FaceFluxSet,
    /// Coefficients of the first pass.
    pub alpha: Vec<f64>,
}

/// Flux-corrected transport: u = u^L + (Δt/|K_i|) Σ_j |S_ij| α_ij (G^L_ij - G^H_ij)
/// with budgets from u^L, followed by `iterations - 1` passes re-limiting the
/// rejected part against the updated solution.
pub fn fct_step(
    disc: &Discretization<'_>,
    u_low: &[f64],
    g_low: &[f64],
    g_high: &[f64],
    dt: f64,
    iterations: usize,
) -> Result<FctOutcome> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("FCT needs at least one iteration".into()));
    }
    let (u_min, u_max) = (disc.problem.u_min, disc.problem.u_max);
    let scale = disc.grid.cell_volume() / dt;
    let mut u = u_low.to_vec();
    let mut flux = g_low.to_vec();
    let mut dg: Vec<f64> = g_low.iter().zip(g_high).map(|(l, h)| l - h).collect();
    let mut first_alpha = None;
    for _ in 0..iterations {
        let (qm, qp) = fct_budgets(&u, u_min, u_max, scale)?;
        let alpha = zalesak_alphas(disc.grid, &dg, &qm, &qp)?;
        let div = limited_divergence(disc, &alpha, &dg);
        u.iter_mut().zip(&div).for_each(|(ui, d)| *ui += dt * d);
        for k in 0..dg.len() {
            flux[k] -= alpha[k] * dg[k];
            dg[k] *= 1.0 - alpha[k];
        }
        first_alpha.get_or_insert(alpha);
    }
    Ok(FctOutcome { u, flux, alpha: first_alpha.expect("at least one pass") })
}

/// Source of the high-order flux inside the convex limiter.
#[derive(Debug, Clone, Copy)]
pub enum HighOrderSource<'a> {
    /// G^H fixed for the whole solve.
    Fixed(&'a [f64]),
    /// G^H re-evaluated from the current iterate.
    Recompute,
}

/// Convex-limiter settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmcSettings {
    pub gamma: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Anderson mixing depth of the sweeps; 0 gives the plain iteration.
    pub anderson: usize,
}

/// Default Anderson depth of the convex-limiter sweeps.
pub const GMC_ANDERSON_DEPTH: usize = 5;

/// Default sweep limit of the convex limiter.
pub const GMC_MAX_SWEEPS: usize = 2000;

impl GmcSettings {
    pub fn new(gamma: f64) -> Self {
        GmcSettings { gamma, tolerance: 1e-12, max_sweeps: GMC_MAX_SWEEPS, anderson: GMC_ANDERSON_DEPTH }
    }
}

/// Per-cell quantities of one convex-limiter evaluation.
#[derive(Debug, Clone)]
pub struct GmcEvaluation {
    pub a: Vec<f64>,
    pub ubar: Vec<f64>,
    pub ustar: Vec<f64>,
    pub g: Vec<f64>,
    pub alpha: Vec<f64>,
    /// G^L - α (G^L - G^H).
    pub flux: FaceFluxSet,
}

/// Q^± = a_i [(u^{max/min} - ū_i) + γ (u^{max/min} - u_i)].
pub fn gmc_budgets(
    a: &[f64],
    ubar: &[f64],
    u: &[f64],
    u_min: f64,
    u_max: f64,
    gamma: f64,
) -> (Vec<f64>, Vec<f64>) {
    let term = |bound: f64, ub: f64, ui: f64| {
        let g = gap(bound, ub);
        if gamma > 0.0 {
            g + gamma * gap(bound, ui)
        } else {
            g
        }
    };
    let qm = (0..a.len()).map(|i| (a[i] * term(u_min, ubar[i], u[i])).min(0.0)).collect();
    let qp = (0..a.len()).map(|i| (a[i] * term(u_max, ubar[i], u[i])).max(0.0)).collect();
    (qm, qp)
}

/// Evaluates ū*, g and the limited flux at state `u`.
pub fn gmc_evaluate(
    disc: &Discretization<'_>,
    u: &[f64],
    high: HighOrderSource<'_>,
    gamma: f64,
    t: f64,
) -> Result<GmcEvaluation> {
    let ext = disc.extend(u);
    let lambda = disc.wave_speeds(&ext);
    let bars = disc.bar_states(&ext, &lambda, t);
    let avg = disc.bar_averages(&bars);
    let g_low = disc.low_order_flux(&ext, &lambda, t);
    let recomputed;
    let g_high = match high {
        HighOrderSource::Fixed(g) => g,
        HighOrderSource::Recompute => {
            recomputed = disc.high_order_flux(&ext, &lambda, t);
            &recomputed
        }
    };
    let dg: Vec<f64> = g_low.iter().zip(g_high).map(|(l, h)| l - h).collect();
    for (i, &ub) in avg.ubar.iter().enumerate() {
        let (lo, hi) = (disc.problem.u_min, disc.problem.u_max);
        if ub < lo - BOUND_SLACK || ub > hi + BOUND_SLACK || !ub.is_finite() {
            return Err(Error::LimiterPrecondition(format!(
                "bar average {ub} at cell {i} lies outside [{lo}, {hi}]"
            )));
        }
    }
    let (qm, qp) =
        gmc_budgets(&avg.a, &avg.ubar, u, disc.problem.u_min, disc.problem.u_max, gamma);
    let alpha = zalesak_alphas(disc.grid, &dg, &qm, &qp)?;
    let vol = disc.grid.cell_volume();
    let corr = limited_divergence(disc, &alpha, &dg);
    let ustar: Vec<f64> =
        (0..u.len()).map(|i| avg.ubar[i] + vol * corr[i] / avg.a[i]).collect();
    let g = (0..u.len()).map(|i| u[i] + (ustar[i] - u[i]) / (1.0 + gamma)).collect();
    let flux = g_low.iter().zip(&alpha).zip(&dg).map(|((l, a), d)| l - a * d).collect();
    Ok(GmcEvaluation { a: avg.a, ubar: avg.ubar, ustar, g, alpha, flux })
}

/// Solves u = base + κ_i (g_i(u) - u_i) - h D_i u_i, κ_i = h a_i (1+γ)/|K_i|,
/// by the fixed-point iteration u ← (base + κ g(u)) / (1 + κ + h D) starting
/// at `start`. Mixed iterates are clipped to the global bounds; a mixed step
/// that raises the residual is replaced by the plain one.
pub fn gmc_solve(
    disc: &Discretization<'_>,
    base: &[f64],
    start: &[f64],
    high: HighOrderSource<'_>,
    h: f64,
    t: f64,
    settings: &GmcSettings,
) -> Result<StageOutcome> {
    if !(settings.gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be nonnegative, got {}", settings.gamma)));
    }
    let vol = disc.grid.cell_volume();
    let rates = disc.self_flux_rates(t);
    let (lo, hi) = (disc.problem.u_min, disc.problem.u_max);
    let mut u = start.to_vec();
    let mut best = f64::INFINITY;
    let mut mixer = Anderson::new(settings.anderson);
    let mut fallback: Option<(Vec<f64>, f64)> = None;
    for sweep in 0..=settings.max_sweeps {
        let ev = gmc_evaluate(disc, &u, high, settings.gamma, t)?;
        let kappa: Vec<f64> = ev.a.iter().map(|a| h * a * (1.0 + settings.gamma) / vol).collect();
        let res: Vec<f64> = (0..u.len())
            .map(|i| u[i] - base[i] - kappa[i] * (ev.g[i] - u[i]) + h * rates[i] * u[i])
            .collect();
        let rn = l2(&res);
        best = best.min(rn);
        if rn <= settings.tolerance {
            let report = SolverReport { iterations: sweep, residual: rn, converged: true };
            return Ok(StageOutcome { y: u, flux: ev.flux, report });
        }
        if !rn.is_finite() {
            break;
        }
        if let Some((plain, prev_rn)) = fallback.take() {
            if rn > prev_rn {
                mixer.reset();
                u = plain;
                continue;
            }
        }
        let plain: Vec<f64> =
            (0..u.len()).map(|i| (base[i] + kappa[i] * ev.g[i]) / (1.0 + kappa[i] + h * rates[i])).collect();
        let d: Vec<f64> = plain.iter().zip(&u).map(|(p, x)| p - x).collect();
        let next = mixer.next(&u, &d);
        if mixer.has_history() {
            u = next.into_iter().map(|x| x.clamp(lo, hi)).collect();
            fallback = Some((plain, rn));
        } else {
            u = plain;
        }
    }
    Err(Error::NotConverged {
        solver: "gmc",
        iterations: settings.max_sweeps,
        residual: best,
        tolerance: settings.tolerance,
    })
}

/// Convex-limited step from u^n with a fixed high-order flux G^H.
pub fn gmc_step(
    disc: &Discretization<'_>,
    u_n: &[f64],
    g_high: &[f64],
    dt: f64,
    t_next: f64,
    settings: &GmcSettings,
) -> Result<StageOutcome> {
    gmc_solve(disc, u_n, u_n, HighOrderSource::Fixed(g_high), dt, t_next, settings)
}

/// -(1/|K_i|) Σ_j |S_ij| [G^L_ij - α_ij (G^L_ij - G^H_ij)] with budgets from
/// the field itself.
pub fn semidiscrete_gmc_rhs(
    disc: &Discretization<'_>,
    u: &[f64],
    gamma: f64,
    t: f64,
) -> Result<Vec<f64>> {
    let ev = gmc_evaluate(disc, u, HighOrderSource::Recompute, gamma, t)?;
    Ok(disc.divergence(&ev.flux).into_iter().map(|d| -d).collect())
}

/// Implicit Euler substeps of the convex-limited semi-discretization.
#[derive(Debug, Clone)]
pub struct GmcStageSolver {
    pub settings: GmcSettings,
    stats: SolverStats,
}

impl GmcStageSolver {
    pub fn new(gamma: f64) -> Self {
        GmcStageSolver { settings: GmcSettings::new(gamma), stats: SolverStats::default() }
    }
}

impl StageSolver for GmcStageSolver {
    fn solve(
        &mut self,
        disc: &Discretization<'_>,
        base: &[f64],
        guess: &[f64],
        h: f64,
        t: f64,
    ) -> Result<StageOutcome> {
        let out = gmc_solve(disc, base, guess, HighOrderSource::Recompute, h, t, &self.settings)?;
        self.stats.record(&out.report);
        Ok(out)
    }

    fn stats(&self) -> SolverStats {
        self.stats
    }
}

/// Step-level limiter shared by the stage filter and the time loop.
#[derive(Debug, Clone)]
pub enum StepLimiter {
    Fct { iterations: usize, low: NewtonSolver },
    Gmc { settings: GmcSettings },
}

impl StepLimiter {
    /// Limits the step u^n → u^n - h div(g_high) ending at time `t_next`.
    pub fn apply(
        &mut self,
        disc: &Discretization<'_>,
        u_n: &[f64],
        g_high: &[f64],
        h: f64,
        t_next: f64,
    ) -> Result<StageOutcome> {
        match self {
            StepLimiter::Fct { iterations, low } => {
                let lo = low.solve(disc, u_n, u_n, h, t_next)?;
                let out = fct_step(disc, &lo.y, &lo.flux, g_high, h, *iterations)?;
                Ok(StageOutcome { y: out.u, flux: out.flux, report: lo.report })
            }
            StepLimiter::Gmc { settings } => gmc_step(disc, u_n, g_high, h, t_next, settings),
        }
    }

    pub fn stats(&self) -> SolverStats {
        match self {
            StepLimiter::Fct { low, .. } => low.stats(),
            StepLimiter::Gmc { .. } => SolverStats::default(),
        }
    }
}

/// Limits each DIRK stage as a step of size c_m Δt from u^n whose high-order
/// flux is Σ_{s≤m} a_ms G(y^(s)) / c_m, then re-evaluates the stage flux at
/// the limited value.
pub struct StageLimiter {
    pub limiter: StepLimiter,
    pub sweeps: SolverStats,
}

impl StageLimiter {
    pub fn new(limiter: StepLimiter) -> Self {
        StageLimiter { limiter, sweeps: SolverStats::default() }
    }
}

impl StageFilter for StageLimiter {
    fn filter(
        &mut self,
        disc: &Discretization<'_>,
        ctx: &StageContext<'_>,
        stage: StageOutcome,
    ) -> Result<StageOutcome> {
        if ctx.c <= 0.0 {
            return Ok(stage);
        }
        let h = ctx.c * ctx.dt;
        let effective: Vec<f64> = ctx.accumulated.iter().map(|g| g / ctx.c).collect();
        let limited = self.limiter.apply(disc, ctx.u_n, &effective, h, ctx.t_stage)?;
        self.sweeps.record(&limited.report);
        let ext = disc.extend(&limited.y);
        let lambda = disc.wave_speeds(&ext);
        let flux = disc.high_order_flux(&ext, &lambda, ctx.t_stage);
        Ok(StageOutcome { y: limited.y, flux, report: stage.report })
    }
}

/// Unlimited update for reference: u^n - h div(g_high).
pub fn unlimited_update(disc: &Discretization<'_>, u_n: &[f64], h: f64, g_high: &[f64]) -> Vec<f64> {
    flux_update(disc, u_n, h, g_high)
}
