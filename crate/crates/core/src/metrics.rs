//! Bound violation δ, the L1 error E1, convergence rates and total mass.

use crate::error::{Error, Result};
use crate::mesh::{ghost_fill, StructuredGrid, GHOST_WIDTH};
use crate::problems::ProblemSpec;
use crate::weno::center_point_value;

/// Diagnostics accumulated over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDiagnostics {
    /// min over recorded fields and cells of min(u - u^min, u^max - u).
    pub delta: f64,
    /// The same minimum taken over intermediate stage values.
    pub stage_delta: f64,
    pub min_seen: f64,
    pub max_seen: f64,
    /// (time, E1) pairs.
    pub e1: Vec<(f64, f64)>,
    pub initial_mass: f64,
    /// Net mass that left through boundary faces.
    pub boundary_outflow: f64,
    pub final_mass: f64,
}

impl RunDiagnostics {
    pub fn new(initial_mass: f64) -> Self {
        RunDiagnostics {
            delta: f64::INFINITY,
            stage_delta: f64::INFINITY,
            min_seen: f64::INFINITY,
            max_seen: f64::NEG_INFINITY,
            e1: Vec::new(),
            initial_mass,
            boundary_outflow: 0.0,
            final_mass: initial_mass,
        }
    }

    /// Relative change of the mass balance initial = final + outflow.
    pub fn mass_drift(&self) -> f64 {
        let scale = self.initial_mass.abs().max(f64::MIN_POSITIVE);
        (self.final_mass + self.boundary_outflow - self.initial_mass).abs() / scale
    }
}

/// Folds one field into the running δ and extrema.
pub fn update_delta(diag: &mut RunDiagnostics, field: &[f64], problem: &ProblemSpec) {
    for &u in field {
        let d = (u - problem.u_min).min(problem.u_max - u);
        diag.delta = diag.delta.min(d);
        diag.min_seen = diag.min_seen.min(u);
        diag.max_seen = diag.max_seen.max(u);
    }
}

/// Folds one intermediate stage value into the stage δ.
pub fn update_stage_delta(diag: &mut RunDiagnostics, stage: &[f64], problem: &ProblemSpec) {
    for &u in stage {
        diag.stage_delta = diag.stage_delta.min((u - problem.u_min).min(problem.u_max - u));
    }
}

/// Point values at cell centers from cell averages, dimension by dimension.
pub fn center_values(field: &[f64], grid: &StructuredGrid, problem: &ProblemSpec) -> Result<Vec<f64>> {
    let mut current = field.to_vec();
    for axis in 0..grid.dim() {
        let ext = ghost_fill(grid, &current, problem, GHOST_WIDTH)?;
        let [nx, ny] = grid.cells_per_axis();
        let mut next = Vec::with_capacity(current.len());
        for j in 0..ny as isize {
            for i in 0..nx as isize {
                next.push(center_point_value(&ext.stencil([i, j], axis)));
            }
        }
        current = next;
    }
    Ok(current)
}

/// E1 = |K| Σ_i |ũ_i - u_exact(x_i, t)|.
pub fn compute_e1(field: &[f64], problem: &ProblemSpec, grid: &StructuredGrid, t: f64) -> Result<f64> {
    let tilde = center_values(field, grid, problem)?;
    let mut acc = 0.0;
    for (c, u) in tilde.iter().enumerate() {
        let x = grid.center_unchecked(c);
        let e = problem
            .exact_solution(x, t)
            .ok_or_else(|| Error::NoExactSolution(format!("{} at t = {t}", problem.name)))?;
        acc += (u - e).abs();
    }
    Ok(grid.cell_volume() * acc)
}

/// rate_k = log(E_k/E_{k+1}) / log(h_k/h_{k+1}).
pub fn eoc(errors: &[f64], spacings: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != spacings.len() {
        return Err(Error::InvalidArgument("errors and spacings differ in length".into()));
    }
    Ok(errors
        .windows(2)
        .zip(spacings.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

/// Σ_i |K_i| u_i.
pub fn total_mass(field: &[f64], grid: &StructuredGrid) -> f64 {
    grid.cell_volume() * field.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryKind;
    use crate::problems;

    #[test]
    fn delta_examples() {
        let p = problems::linear_advdiff_1d(0.0).unwrap();
        let mut d = RunDiagnostics::new(0.0);
        update_delta(&mut d, &[0.0, 0.5], &p);
        assert_eq!(d.delta, 0.0);
        update_delta(&mut d, &[1.001], &p);
        assert!(d.delta <= -1e-3 + 1e-15);
        assert_eq!(d.max_seen, 1.001);
    }

    #[test]
    fn eoc_examples() {
        assert_eq!(eoc(&[4.0, 1.0], &[2.0, 1.0]).unwrap(), vec![2.0]);
        let r = eoc(&[1.37, 9.07e-1], &[2.0, 1.0]).unwrap()[0];
        assert!((r - 0.59).abs() < 0.01);
        assert_eq!(eoc(&[3.0, 3.0], &[2.0, 1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn mass_examples() {
        let g = StructuredGrid::new_1d(4, 0.0, 1.0, BoundaryKind::Periodic).unwrap();
        assert_eq!(total_mass(&[2.5; 4], &g), 2.5);
        assert_eq!(total_mass(&[0.0; 4], &g), 0.0);
    }

    #[test]
    fn e1_of_exact_centers_is_zero() {
        let p = problems::linear_advdiff_2d(0.001).unwrap();
        let e = |n: usize| {
            let g = StructuredGrid::for_problem(&p, n, n).unwrap();
            compute_e1(&problems::initial_field(&p, &g), &p, &g, 0.0).unwrap()
        };
        // Averages converted back to point values: a fourth-order defect.
        let (coarse, fine) = (e(32), e(64));
        assert!(fine < 1e-3 && coarse / fine > 16.0, "{coarse} {fine}");
        let burgers = problems::burgers_1d();
        let gb = StructuredGrid::for_problem(&burgers, 8, 1).unwrap();
        assert!(compute_e1(&[0.0; 8], &burgers, &gb, 0.1).is_err());
    }
}
