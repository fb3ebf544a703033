//! Nonlinear solvers for the implicit stage and step equations
//! y = base - (h/|K_i|) Σ_j |S_ij| G_ij(y).

pub mod anderson;
pub mod jacobian;
pub mod sparse;

use crate::error::{Error, Result};
use crate::fluxes::{Discretization, FaceFluxSet};
use crate::mesh::ExtendedField;

pub use jacobian::{assemble_pseudo_jacobian, frozen_jacobian, frozen_state};
pub use sparse::{linear_solve, SparseBandedMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Running totals over many solves.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverStats {
    pub solves: usize,
    pub iterations: usize,
    pub max_iterations: usize,
}

impl SolverStats {
    pub fn record(&mut self, report: &SolverReport) {
        self.solves += 1;
        self.iterations += report.iterations;
        self.max_iterations = self.max_iterations.max(report.iterations);
    }

    pub fn merge(&mut self, other: &SolverStats) {
        self.solves += other.solves;
        self.iterations += other.iterations;
        self.max_iterations = self.max_iterations.max(other.max_iterations);
    }
}

/// Solution of one implicit equation with the flux it was evaluated with.
#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub y: Vec<f64>,
    pub flux: FaceFluxSet,
    pub report: SolverReport,
}

/// Solves y = base - (h/|K_i|) Σ_j |S_ij| G_ij(y, t) for y.
pub trait StageSolver {
    fn solve(
        &mut self,
        disc: &Discretization<'_>,
        base: &[f64],
        guess: &[f64],
        h: f64,
        t: f64,
    ) -> Result<StageOutcome>;

    fn stats(&self) -> SolverStats;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// Reassemble the pseudo-Jacobian at every Newton iterate.
    Fresh,
    /// Reuse one Jacobian linearized about a constant state.
    Frozen,
}

impl std::str::FromStr for JacobianMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fresh-jacobian" => Ok(JacobianMode::Fresh),
            "frozen-jacobian" => Ok(JacobianMode::Frozen),
            other => Err(Error::UnknownName { kind: "solver", name: other.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub mode: JacobianMode,
    /// Anderson mixing depth; 0 gives the plain pseudo-Jacobian iteration.
    pub anderson: usize,
    /// Relative residual target of the iterative linear solves (inexact Newton).
    pub linear_forcing: f64,
}

impl NewtonSettings {
    pub fn low_order(mode: JacobianMode) -> Self {
        NewtonSettings { tolerance: 1e-12, max_iterations: 100, mode, anderson: 0, linear_forcing: 0.0 }
    }

    pub fn stage(mode: JacobianMode) -> Self {
        NewtonSettings {
            tolerance: 1e-8,
            max_iterations: 50,
            mode,
            anderson: STAGE_ANDERSON_DEPTH,
            linear_forcing: STAGE_LINEAR_FORCING,
        }
    }
}

/// Default Anderson depth of the high-order stage iteration.
pub const STAGE_ANDERSON_DEPTH: usize = 5;

/// Default linear forcing term of the high-order stage iteration.
pub const STAGE_LINEAR_FORCING: f64 = 1e-2;

/// Which flux enters the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualFlux {
    LowOrder,
    HighOrder,
}

/// Newton iteration with the low-order pseudo-Jacobian as iteration matrix.
#[derive(Debug, Clone)]
pub struct NewtonSolver {
    pub settings: NewtonSettings,
    pub flux: ResidualFlux,
    /// Linearization state for the frozen mode.
    pub frozen_state: f64,
    frozen: Option<FrozenCache>,
    fresh: Option<FreshCache>,
    stats: SolverStats,
}

/// Last assembled pseudo-Jacobian and its factorization, reused while the
/// assembly reproduces it exactly (state-independent Jacobians).
#[derive(Debug, Clone)]
struct FreshCache {
    /// (h, t) of the cached matrix when the problem is linear, where the
    /// matrix depends on nothing else.
    linear_key: Option<(u64, u64)>,
    matrix: SparseBandedMatrix,
    scratch: SparseBandedMatrix,
    factorization: Option<sparse::Factorization>,
}

#[derive(Debug, Clone)]
struct FrozenCache {
    key: (u64, u64),
    matrix: SparseBandedMatrix,
    factorization: sparse::Factorization,
}

impl NewtonSolver {
    pub fn new(flux: ResidualFlux, settings: NewtonSettings, frozen_state: f64) -> Self {
        NewtonSolver { settings, flux, frozen_state, frozen: None, fresh: None, stats: SolverStats::default() }
    }

    /// Low-order solver with the default tolerance.
    pub fn low_order(mode: JacobianMode, frozen_state: f64) -> Self {
        Self::new(ResidualFlux::LowOrder, NewtonSettings::low_order(mode), frozen_state)
    }

    /// High-order stage solver with the default tolerance.
    pub fn stage(mode: JacobianMode, frozen_state: f64) -> Self {
        Self::new(ResidualFlux::HighOrder, NewtonSettings::stage(mode), frozen_state)
    }

    fn evaluate(&self, disc: &Discretization<'_>, ext: &ExtendedField, lambda: &[f64], t: f64) -> FaceFluxSet {
        match self.flux {
            ResidualFlux::LowOrder => disc.low_order_flux(ext, lambda, t),
            ResidualFlux::HighOrder => disc.high_order_flux(ext, lambda, t),
        }
    }

    fn fresh_factorization(
        &mut self,
        disc: &Discretization<'_>,
        ext: &ExtendedField,
        lambda: &[f64],
        h: f64,
        t: f64,
    ) -> Result<&FreshCache> {
        let n = disc.num_cells();
        if self.fresh.as_ref().map(|c| c.matrix.dimension()) != Some(n) {
            let pattern = SparseBandedMatrix::with_grid_pattern(disc.grid);
            self.fresh =
                Some(FreshCache { linear_key: None, matrix: pattern.clone(), scratch: pattern, factorization: None });
        }
        let key = disc.problem.is_linear().then(|| time_key(disc, h, t));
        let cache = self.fresh.as_mut().expect("cache filled above");
        if key.is_some() && cache.linear_key == key && cache.factorization.is_some() {
            return Ok(cache);
        }
        jacobian::assemble_pseudo_jacobian_into(disc, ext, lambda, h, t, &mut cache.scratch);
        if cache.factorization.is_none() || !cache.scratch.same_entries(&cache.matrix) {
            std::mem::swap(&mut cache.matrix, &mut cache.scratch);
            cache.factorization = None;
            cache.factorization = Some(cache.matrix.factorize()?);
        }
        cache.linear_key = key;
        Ok(cache)
    }

    fn frozen_factorization(
        &mut self,
        disc: &Discretization<'_>,
        h: f64,
        t: f64,
    ) -> Result<&FrozenCache> {
        let key = time_key(disc, h, t);
        if self.frozen.as_ref().map(|c| c.key) != Some(key) {
            let matrix = frozen_jacobian(disc, self.frozen_state, h, t);
            let factorization = matrix.factorize()?;
            self.frozen = Some(FrozenCache { key, matrix, factorization });
        }
        Ok(self.frozen.as_ref().expect("cache filled above"))
    }
}

/// Cache key of a state-independent Jacobian.
fn time_key(disc: &Discretization<'_>, h: f64, t: f64) -> (u64, u64) {
    (h.to_bits(), if disc.problem.is_time_dependent() { t.to_bits() } else { 0 })
}

/// r = y - base + h div G.
pub(crate) fn stage_residual(disc: &Discretization<'_>, y: &[f64], base: &[f64], h: f64, flux: &[f64]) -> Vec<f64> {
    let div = disc.divergence(flux);
    y.iter().zip(base).zip(&div).map(|((y, b), d)| y - b + h * d).collect()
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl StageSolver for NewtonSolver {
    fn solve(
        &mut self,
        disc: &Discretization<'_>,
        base: &[f64],
        guess: &[f64],
        h: f64,
        t: f64,
    ) -> Result<StageOutcome> {
        let mut y = guess.to_vec();
        let mut best: Option<f64> = None;
        let mut mixer = anderson::Anderson::new(self.settings.anderson);
        // Last plain step (y_k + d_k) and residual, kept to undo a mixed step
        // that increased the residual.
        let mut fallback: Option<(Vec<f64>, f64)> = None;
        for iter in 0..=self.settings.max_iterations {
            let ext = disc.extend(&y);
            let lambda = disc.wave_speeds(&ext);
            let flux = self.evaluate(disc, &ext, &lambda, t);
            if h == 0.0 {
                let report = SolverReport { iterations: 0, residual: 0.0, converged: true };
                self.stats.record(&report);
                return Ok(StageOutcome { y: base.to_vec(), flux, report });
            }
            let r = stage_residual(disc, &y, base, h, &flux);
            let rn = l2(&r);
            if !rn.is_finite() {
                break;
            }
            best = Some(best.map_or(rn, |b: f64| b.min(rn)));
            if rn > self.settings.tolerance {
                if let Some((plain, prev_rn)) = fallback.take() {
                    if rn > prev_rn {
                        mixer.reset();
                        y = plain;
                        continue;
                    }
                }
            }
            if rn <= self.settings.tolerance {
                let report = SolverReport { iterations: iter, residual: rn, converged: true };
                self.stats.record(&report);
                return Ok(StageOutcome { y, flux, report });
            }
            if iter == self.settings.max_iterations {
                break;
            }
            let eta = self.settings.linear_forcing;
            let delta = match self.settings.mode {
                JacobianMode::Fresh => {
                    let cache = self.fresh_factorization(disc, &ext, &lambda, h, t)?;
                    let f = cache.factorization.as_ref().expect("factorized above");
                    f.solve_to(&cache.matrix, &r, eta)?
                }
                JacobianMode::Frozen => {
                    let cache = self.frozen_factorization(disc, h, t)?;
                    cache.factorization.solve_to(&cache.matrix, &r, eta)?
                }
            };
            let d: Vec<f64> = delta.iter().map(|x| -x).collect();
            let next = mixer.next(&y, &d);
            if mixer.has_history() {
                y.iter_mut().zip(&d).for_each(|(yi, di)| *yi += di);
                fallback = Some((std::mem::replace(&mut y, next), rn));
            } else {
                y = next;
            }
        }
        Err(Error::NotConverged {
            solver: match self.flux {
                ResidualFlux::LowOrder => "newton-low-order",
                ResidualFlux::HighOrder => "newton-stage",
            },
            iterations: self.settings.max_iterations,
            residual: best.unwrap_or(f64::NAN),
            tolerance: self.settings.tolerance,
        })
    }

    fn stats(&self) -> SolverStats {
        self.stats
    }
}

/// Backward Euler step of the low-order scheme: returns u^{L,n+1}, its
/// fluxes G^L and the report.
pub fn newton_low_order(
    disc: &Discretization<'_>,
    u_n: &[f64],
    dt: f64,
    t_next: f64,
    mode: JacobianMode,
) -> Result<StageOutcome> {
    let mut s = NewtonSolver::low_order(mode, frozen_state(u_n));
    s.solve(disc, u_n, u_n, dt, t_next)
}

/// One high-order stage y = base - h div G^H(y) solved by Newton.
pub fn newton_stage(
    disc: &Discretization<'_>,
    base: &[f64],
    guess: &[f64],
    h: f64,
    t_stage: f64,
    mode: JacobianMode,
) -> Result<StageOutcome> {
    let mut s = NewtonSolver::stage(mode, frozen_state(base));
    s.solve(disc, base, guess, h, t_stage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::StructuredGrid;
    use crate::problems;

    #[test]
    fn constant_field_converges_immediately() {
        let p = problems::burgers_1d();
        let g = StructuredGrid::for_problem(&p, 20, 1).unwrap();
        let d = Discretization::new(&g, &p).unwrap();
        let u = vec![0.7; 20];
        let out = newton_low_order(&d, &u, 0.05, 0.05, JacobianMode::Fresh).unwrap();
        assert!(out.report.iterations <= 1);
        assert!(out.y.iter().all(|&v| (v - 0.7).abs() < 1e-14));
        let out = newton_stage(&d, &u, &u, 0.05, 0.05, JacobianMode::Fresh).unwrap();
        assert_eq!(out.report.iterations, 0);
    }

    #[test]
    fn linear_low_order_converges_in_one_iteration() {
        let p = problems::linear_advdiff_1d(0.001).unwrap();
        let g = StructuredGrid::for_problem(&p, 40, 1).unwrap();
        let d = Discretization::new(&g, &p).unwrap();
        let u = problems::initial_field(&p, &g).into_values();
        let out = newton_low_order(&d, &u, 0.3, 0.3, JacobianMode::Fresh).unwrap();
        assert_eq!(out.report.iterations, 1);
        let frozen = newton_low_order(&d, &u, 0.3, 0.3, JacobianMode::Frozen).unwrap();
        assert_eq!(frozen.report.iterations, 1);
    }

    #[test]
    fn modes_parse() {
        assert_eq!("frozen-jacobian".parse::<JacobianMode>().unwrap(), JacobianMode::Frozen);
        assert!("exact".parse::<JacobianMode>().is_err());
    }
}
