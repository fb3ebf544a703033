//! DIRK stage equations, high-order flux aggregation and implicit Euler
//! extrapolation.

use crate::error::{Error, Result};
use crate::fluxes::{Discretization, FaceFluxSet};
use crate::solvers::{StageOutcome, StageSolver};
use crate::tableau::{extrapolation_weights, iex_stage_index, ButcherTableau};

/// Intermediate values y^(m) and their fluxes.
#[derive(Debug, Clone, Default)]
pub struct StageSet {
    pub values: Vec<Vec<f64>>,
    pub fluxes: Vec<FaceFluxSet>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    /// u^{H,n+1}.
    pub u: Vec<f64>,
    /// Aggregated high-order flux G^H = Σ_m b_m G(y^(m)).
    pub flux: FaceFluxSet,
    pub stages: StageSet,
}

/// Data available to a stage post-processor.
#[derive(Debug, Clone, Copy)]
pub struct StageContext<'a> {
    pub stage: usize,
    pub u_n: &'a [f64],
    /// Σ_{s≤m} a_ms G(y^(s)), so that y^(m) = u^n - Δt div(accumulated).
    pub accumulated: &'a [f64],
    /// c_m = Σ_s a_ms.
    pub c: f64,
    pub dt: f64,
    pub t_n: f64,
    pub t_stage: f64,
}

/// Optional replacement of each solved stage, e.g. by a limited value.
pub trait StageFilter {
    fn filter(
        &mut self,
        disc: &Discretization<'_>,
        ctx: &StageContext<'_>,
        stage: StageOutcome,
    ) -> Result<StageOutcome>;
}

/// Leaves every stage untouched.
pub struct NoFilter;

impl StageFilter for NoFilter {
    fn filter(
        &mut self,
        _disc: &Discretization<'_>,
        _ctx: &StageContext<'_>,
        stage: StageOutcome,
    ) -> Result<StageOutcome> {
        Ok(stage)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")))
    }
}

fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// u^n - Δt div(flux).
pub fn flux_update(disc: &Discretization<'_>, u_n: &[f64], dt: f64, flux: &[f64]) -> Vec<f64> {
    let div = disc.divergence(flux);
    u_n.iter().zip(&div).map(|(u, d)| u - dt * d).collect()
}

/// One DIRK step.
pub fn dirk_step(
    disc: &Discretization<'_>,
    u_n: &[f64],
    tableau: &ButcherTableau,
    solver: &mut dyn StageSolver,
    dt: f64,
    t_n: f64,
) -> Result<StepResult> {
    dirk_step_filtered(disc, u_n, tableau, solver, &mut NoFilter, dt, t_n)
}

/// One DIRK step with every solved stage passed through `filter` before
/// later stages use it.
pub fn dirk_step_filtered(
    disc: &Discretization<'_>,
    u_n: &[f64],
    tableau: &ButcherTableau,
    solver: &mut dyn StageSolver,
    filter: &mut dyn StageFilter,
    dt: f64,
    t_n: f64,
) -> Result<StepResult> {
    check_dt(dt)?;
    let m_total = tableau.stages();
    let nf = disc.num_faces();
    let mut stages = StageSet::default();
    for m in 0..m_total {
        let mut acc = vec![0.0; nf];
        for s in 0..m {
            if tableau.a[m][s] != 0.0 {
                axpy(&mut acc, tableau.a[m][s], &stages.fluxes[s]);
            }
        }
        let base = flux_update(disc, u_n, dt, &acc);
        // Predictor: the stage equation with the previous stage's flux.
        let guess = match stages.fluxes.last() {
            Some(g) => flux_update(disc, &base, tableau.a[m][m] * dt, g),
            None => u_n.to_vec(),
        };
        let t_stage = t_n + tableau.c[m] * dt;
        let outcome = solver.solve(disc, &base, &guess, tableau.a[m][m] * dt, t_stage)?;
        axpy(&mut acc, tableau.a[m][m], &outcome.flux);
        let ctx = StageContext {
            stage: m,
            u_n,
            accumulated: &acc,
            c: tableau.c[m],
            dt,
            t_n,
            t_stage,
        };
        let outcome = filter.filter(disc, &ctx, outcome)?;
        stages.values.push(outcome.y);
        stages.fluxes.push(outcome.flux);
        stages.times.push(t_stage);
    }
    let mut flux = vec![0.0; nf];
    for (b, g) in tableau.b.iter().zip(&stages.fluxes) {
        axpy(&mut flux, *b, g);
    }
    let u = flux_update(disc, u_n, dt, &flux);
    Ok(StepResult { u, flux, stages })
}

/// One step of implicit Euler extrapolation of order `p`: chain k takes k
/// implicit Euler substeps of size Δt/k and the chain results are combined
/// by the Aitken-Neville recursion. Stages are reported in the order of the
/// Runge-Kutta form.
pub fn iex_step(
    disc: &Discretization<'_>,
    u_n: &[f64],
    p: usize,
    solver: &mut dyn StageSolver,
    dt: f64,
    t_n: f64,
) -> Result<StepResult> {
    check_dt(dt)?;
    let weights = extrapolation_weights(p)?;
    let nf = disc.num_faces();
    let m_total = p * (p + 1) / 2;
    let mut values = vec![Vec::new(); m_total];
    let mut fluxes = vec![Vec::new(); m_total];
    let mut times = vec![0.0; m_total];
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(p);
    for k in 1..=p {
        let h = dt / k as f64;
        let mut y = u_n.to_vec();
        for j in 1..=k {
            let t = t_n + j as f64 * h;
            let out = solver.solve(disc, &y, &y, h, t)?;
            let idx = iex_stage_index(k, j);
            y = out.y;
            values[idx] = y.clone();
            fluxes[idx] = out.flux;
            times[idx] = t;
        }
        table.push(y);
    }
    for k in 2..=p {
        for j in (k..=p).rev() {
            let factor = j as f64 / (j - k + 1) as f64 - 1.0;
            let (lo, hi) = table.split_at_mut(j - 1);
            let prev = &lo[j - 2];
            for (t, q) in hi[0].iter_mut().zip(prev) {
                *t += (*t - q) / factor;
            }
        }
    }
    let u = table.pop().expect("p >= 1");
    let mut flux = vec![0.0; nf];
    for k in 1..=p {
        for j in 1..=k {
            axpy(&mut flux, weights[k - 1] / k as f64, &fluxes[iex_stage_index(k, j)]);
        }
    }
    Ok(StepResult { u, flux, stages: StageSet { values, fluxes, times } })
}
