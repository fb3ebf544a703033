//! Pseudo-Jacobians of the low-order residual with λ^A held fixed.

use crate::fluxes::Discretization;
use crate::mesh::{ExtendedField, Slot};
use crate::solvers::sparse::SparseBandedMatrix;

/// Derivatives of the lower-to-upper low-order flux G^L with respect to the
/// lower and upper cell values, λ^A fixed.
#[inline]
pub(crate) fn face_derivatives(
    disc: &Discretization<'_>,
    face: &crate::mesh::Face,
    lower: f64,
    upper: f64,
    lambda: f64,
    t: f64,
) -> (f64, f64) {
    let p = disc.problem;
    let a = face.axis;
    let mean = 0.5 * (lower + upper);
    let c = p.diffusion(mean, face.midpoint);
    let dc = p.diffusion_derivative(mean, face.midpoint);
    let d = face.distance;
    let jump = (upper - lower) / d;
    let d_lower = 0.5 * p.flux_derivative(lower, face.midpoint, t, a) + 0.5 * lambda + c / d
        - 0.5 * dc * jump;
    let d_upper = 0.5 * p.flux_derivative(upper, face.midpoint, t, a) - 0.5 * lambda - c / d
        - 0.5 * dc * jump;
    (d_lower, d_upper)
}

/// Writes J = I + h/|K| A(u) into `matrix`, where A collects the derivatives
/// of Σ_j |S_ij| G^L_ij with respect to the interior cell values.
pub fn assemble_pseudo_jacobian_into(
    disc: &Discretization<'_>,
    ext: &ExtendedField,
    lambda: &[f64],
    h: f64,
    t: f64,
    matrix: &mut SparseBandedMatrix,
) {
    matrix.clear();
    let n = disc.num_cells();
    for i in 0..n {
        matrix.add(i, i, 1.0);
    }
    let scale = h / disc.grid.cell_volume();
    for (k, face) in disc.grid.faces().iter().enumerate() {
        let pair = disc.pair(ext, face);
        let (dl, du) = face_derivatives(disc, face, pair.lower, pair.upper, lambda[k], t);
        let s = scale * face.area;
        // The lower cell's divergence gains +G, the upper cell's loses it.
        for (row, sign) in [(face.lower, 1.0), (face.upper, -1.0)] {
            if let Slot::Cell(r) = row {
                if let Slot::Cell(cl) = face.lower {
                    matrix.add(r, cl, sign * s * dl);
                }
                if let Slot::Cell(cu) = face.upper {
                    matrix.add(r, cu, sign * s * du);
                }
            }
        }
    }
}

/// J = I + h/|K| A(u) for the state `u` and its λ^A.
pub fn assemble_pseudo_jacobian(
    disc: &Discretization<'_>,
    u: &[f64],
    h: f64,
    t: f64,
) -> SparseBandedMatrix {
    let ext = disc.extend(u);
    let lambda = disc.wave_speeds(&ext);
    let mut m = SparseBandedMatrix::with_grid_pattern(disc.grid);
    assemble_pseudo_jacobian_into(disc, &ext, &lambda, h, t, &mut m);
    m
}

/// Linearization state ½[max u0 - min u0] used by the frozen Jacobian.
pub fn frozen_state(u0: &[f64]) -> f64 {
    let max = u0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = u0.iter().copied().fold(f64::INFINITY, f64::min);
    0.5 * (max - min)
}

/// Pseudo-Jacobian linearized about the constant state `state`.
pub fn frozen_jacobian(disc: &Discretization<'_>, state: f64, h: f64, t: f64) -> SparseBandedMatrix {
    assemble_pseudo_jacobian(disc, &vec![state; disc.num_cells()], h, t)
}
