//! Low-order and high-order numerical fluxes and the bar states.
//!
//! Face quantities are computed once per geometric face from the lower to
//! the upper cell along the face axis and then stored in owner orientation,
//! so G_ij = -G_ji holds by construction.

use crate::error::Result;
use crate::mesh::{ghost_fill_with, ExtendedField, Face, StructuredGrid, GHOST_WIDTH};
use crate::par::{self, Exec};
use crate::problems::{Boundary, ProblemSpec};
use crate::weno::{self, Stencil5, WenoParams};

/// One value per face in owner orientation.
pub type FaceFluxSet = Vec<f64>;

/// Rusanov flux F^L_ij = n·(f(u_i, x_i) + f(u_j, x_j))/2 - λ^A (u_j - u_i)/2.
#[allow(clippy::too_many_arguments)]
pub fn low_order_convective_flux(
    problem: &ProblemSpec,
    face: &Face,
    ui: f64,
    uj: f64,
    xi: [f64; 2],
    xj: [f64; 2],
    t: f64,
    lambda: f64,
) -> f64 {
    let n = face.normal[face.axis];
    n * 0.5 * (problem.flux(ui, xi, t, face.axis) + problem.flux(uj, xj, t, face.axis))
        - 0.5 * lambda * (uj - ui)
}

/// Diffusive flux P^L_ij = c((u_i+u_j)/2, (x_i+x_j)/2) (u_j - u_i)/|x_j - x_i|.
pub fn low_order_diffusive_flux(
    problem: &ProblemSpec,
    ui: f64,
    uj: f64,
    xi: [f64; 2],
    xj: [f64; 2],
) -> f64 {
    let mid = [0.5 * (xi[0] + xj[0]), 0.5 * (xi[1] + xj[1])];
    let dist = ((xj[0] - xi[0]).powi(2) + (xj[1] - xi[1]).powi(2)).sqrt();
    problem.diffusion(0.5 * (ui + uj), mid) * (uj - ui) / dist
}

/// Per-face bar states, shared by both orientations of a face.
#[derive(Debug, Clone, Default)]
pub struct BarStateSet {
    pub advective: Vec<f64>,
    pub diffusive: Vec<f64>,
    pub blended: Vec<f64>,
    /// λ_ij = λ^A_ij (1 + 2 c_ij / (λ^A_ij |x_j - x_i|)).
    pub lambda: Vec<f64>,
    pub lambda_a: Vec<f64>,
    pub c: Vec<f64>,
}

/// Cell-wise aggregates of the bar states used by the convex limiter.
#[derive(Debug, Clone)]
pub struct BarAverages {
    /// a_i = Σ_j |S_ij| λ_ij.
    pub a: Vec<f64>,
    /// ū_i = Σ_j |S_ij| λ_ij ū_ij / a_i.
    pub ubar: Vec<f64>,
}

/// Spatial discretization of one problem on one grid.
#[derive(Debug, Clone)]
pub struct Discretization<'a> {
    pub grid: &'a StructuredGrid,
    pub problem: &'a ProblemSpec,
    pub weno: WenoParams,
    pub exec: Exec,
    dirichlet: [Option<(f64, f64)>; 2],
}

/// Face data evaluated from the lower to the upper cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FacePair {
    pub lower: f64,
    pub upper: f64,
}

impl<'a> Discretization<'a> {
    pub fn new(grid: &'a StructuredGrid, problem: &'a ProblemSpec) -> Result<Self> {
        let mut dirichlet = [None; 2];
        for axis in 0..grid.dim() {
            if grid.boundary()[axis] != problem.boundary[axis].kind() {
                return Err(crate::error::Error::InvalidArgument(format!(
                    "grid and problem disagree on the boundary kind of axis {axis}"
                )));
            }
            if let Boundary::Dirichlet { lower, upper } = problem.boundary[axis] {
                dirichlet[axis] = Some((lower, upper));
            }
        }
        Ok(Discretization { grid, problem, weno: WenoParams::default(), exec: Exec::auto(), dirichlet })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn num_cells(&self) -> usize {
        self.grid.num_cells()
    }

    pub fn num_faces(&self) -> usize {
        self.grid.faces().len()
    }

    /// Pads a cell field with the ghost layers needed by the reconstruction.
    pub fn extend(&self, u: &[f64]) -> ExtendedField {
        ghost_fill_with(self.grid, u, self.dirichlet, GHOST_WIDTH)
    }

    #[inline]
    fn upper_ij(face: &Face) -> [isize; 2] {
        let mut ij = face.lower_ij;
        ij[face.axis] += 1;
        ij
    }

    #[inline]
    pub(crate) fn pair(&self, ext: &ExtendedField, face: &Face) -> FacePair {
        let up = Self::upper_ij(face);
        FacePair {
            lower: ext.get(face.lower_ij),
            upper: ext.get(up),
        }
    }

    /// WENO (value, derivative) at the left and right faces of every cell
    /// along each axis, including one ghost cell at each end of a line.
    /// Line `l`, position `i` sits at `l * (n + 2) + i + 1`.
    fn cell_reconstructions(&self, ext: &ExtendedField) -> [Vec<[(f64, f64); 2]>; 2] {
        let cells = self.grid.cells_per_axis();
        let spacing = self.grid.spacing();
        let mut out = [Vec::new(), Vec::new()];
        for (axis, slot) in out.iter_mut().enumerate().take(self.grid.dim()) {
            let n = cells[axis];
            let lines = if self.grid.dim() == 2 { cells[1 - axis] } else { 1 };
            let h = spacing[axis];
            *slot = par::map_indexed(self.exec, lines * (n + 2), |k| {
                let (line, pos) = (k / (n + 2), (k % (n + 2)) as isize - 1);
                let mut ij = [0isize; 2];
                ij[axis] = pos;
                if self.grid.dim() == 2 {
                    ij[1 - axis] = line as isize;
                }
                weno::weno5_cell_faces(&Stencil5::new(ext.stencil(ij, axis), h), &self.weno)
            });
        }
        out
    }

    /// Per face: (p_lower, derivative) at the lower cell's right face and
    /// (p_upper, derivative) at the upper cell's left face.
    fn face_reconstructions(&self, ext: &ExtendedField) -> Vec<((f64, f64), (f64, f64))> {
        let cells = self.grid.cells_per_axis();
        let rec = self.cell_reconstructions(ext);
        let faces = self.grid.faces();
        let dim = self.grid.dim();
        par::map_indexed(self.exec, faces.len(), |k| {
            let face = &faces[k];
            let a = face.axis;
            let n = cells[a];
            let line = if dim == 2 { face.lower_ij[1 - a] as usize } else { 0 };
            let base = line * (n + 2) + 1;
            let lo = (base as isize + face.lower_ij[a]) as usize;
            (rec[a][lo][1], rec[a][lo + 1][0])
        })
    }

    /// λ^A per face from the current state.
    pub fn wave_speeds(&self, ext: &ExtendedField) -> Vec<f64> {
        let faces = self.grid.faces();
        if !self.problem.wave_speed_needs_reconstruction() {
            let l = self.problem.wave_speed_bound(0.0, 0.0, (0.0, 0.0));
            return vec![l; faces.len()];
        }
        let rec = self.face_reconstructions(ext);
        par::map_indexed(self.exec, faces.len(), |k| {
            let p = self.pair(ext, &faces[k]);
            let ((pl, _), (pu, _)) = rec[k];
            self.problem.wave_speed_bound(p.lower, p.upper, (pl, pu))
        })
    }

    /// Lower-to-upper low-order flux G^L = F^L - P^L.
    #[inline]
    pub(crate) fn low_order_lu(&self, face: &Face, p: &FacePair, lambda: f64, t: f64) -> f64 {
        let a = face.axis;
        let fl = self.problem.flux(p.lower, face.midpoint, t, a);
        let fu = self.problem.flux(p.upper, face.midpoint, t, a);
        let c = self.problem.diffusion(0.5 * (p.lower + p.upper), face.midpoint);
        0.5 * (fl + fu) - 0.5 * lambda * (p.upper - p.lower)
            - c * (p.upper - p.lower) / face.distance
    }

    /// G^L per face in owner orientation.
    pub fn low_order_flux(&self, ext: &ExtendedField, lambda: &[f64], t: f64) -> FaceFluxSet {
        let faces = self.grid.faces();
        par::map_indexed(self.exec, faces.len(), |k| {
            let face = &faces[k];
            let p = self.pair(ext, face);
            face.orientation() * self.low_order_lu(face, &p, lambda[k], t)
        })
    }

    /// G^H = F^H - P^H per face in owner orientation, with WENO point values
    /// at the face midpoint and f evaluated at the midpoint and time `t`.
    pub fn high_order_flux(&self, ext: &ExtendedField, lambda: &[f64], t: f64) -> FaceFluxSet {
        let faces = self.grid.faces();
        let diffusive = self.problem.epsilon() > 0.0;
        let rec = self.face_reconstructions(ext);
        par::map_indexed(self.exec, faces.len(), |k| {
            let face = &faces[k];
            let ((pl, dl), (pu, du)) = rec[k];
            let a = face.axis;
            let x = face.midpoint;
            let conv = 0.5 * (self.problem.flux(pl, x, t, a) + self.problem.flux(pu, x, t, a))
                - 0.5 * lambda[k] * (pu - pl);
            let diff = if diffusive {
                0.5 * (self.problem.diffusion(pl, x) * dl + self.problem.diffusion(pu, x) * du)
            } else {
                0.0
            };
            face.orientation() * (conv - diff)
        })
    }

    /// Bar states per face.
    pub fn bar_states(&self, ext: &ExtendedField, lambda_a: &[f64], t: f64) -> BarStateSet {
        let faces = self.grid.faces();
        let rows = par::map_indexed(self.exec, faces.len(), |k| {
            let face = &faces[k];
            let p = self.pair(ext, face);
            let la = lambda_a[k];
            let a = face.axis;
            let df = self.problem.flux(p.upper, face.midpoint, t, a)
                - self.problem.flux(p.lower, face.midpoint, t, a);
            let ud = 0.5 * (p.lower + p.upper);
            let ua = ud - df / (2.0 * la);
            let c = self.problem.diffusion(ud, face.midpoint);
            let beta = 2.0 * c / (la * face.distance);
            let ub = (ua + beta * ud) / (1.0 + beta);
            (ua, ud, ub, la * (1.0 + beta), la, c)
        });
        let mut set = BarStateSet::default();
        for (ua, ud, ub, l, la, c) in rows {
            set.advective.push(ua);
            set.diffusive.push(ud);
            set.blended.push(ub);
            set.lambda.push(l);
            set.lambda_a.push(la);
            set.c.push(c);
        }
        set
    }

    /// a_i and ū_i per cell.
    pub fn bar_averages(&self, bars: &BarStateSet) -> BarAverages {
        let faces = self.grid.faces();
        let n = self.num_cells();
        let rows = par::map_indexed(self.exec, n, |i| {
            let mut a = 0.0;
            let mut s = 0.0;
            for &(fi, _) in self.grid.cell_faces(i) {
                let w = faces[fi].area * bars.lambda[fi];
                a += w;
                s += w * bars.blended[fi];
            }
            (a, s / a)
        });
        let (a, ubar) = rows.into_iter().unzip();
        BarAverages { a, ubar }
    }

    /// Σ_j |S_ij| λ_ij (ū_ij - u_i) / |K_i| - D_i u_i.
    pub fn low_order_rhs(&self, u: &[f64], lambda_a: &[f64], t: f64) -> Vec<f64> {
        let ext = self.extend(u);
        let bars = self.bar_states(&ext, lambda_a, t);
        let rates = self.self_flux_rates(t);
        let faces = self.grid.faces();
        let inv_vol = 1.0 / self.grid.cell_volume();
        par::map_indexed(self.exec, self.num_cells(), |i| {
            let mut acc = 0.0;
            for &(fi, _) in self.grid.cell_faces(i) {
                acc += faces[fi].area * bars.lambda[fi] * (bars.blended[fi] - u[i]);
            }
            acc * inv_vol - rates[i] * u[i]
        })
    }

    /// D_i with (1/|K_i|) Σ_j |S_ij| f(u_i, x_ij)·n_ij = D_i u_i.
    ///
    /// D_i is the discrete divergence of the velocity at the face midpoints
    /// for linear fluxes and zero for fluxes without explicit x-dependence.
    pub fn self_flux_rates(&self, t: f64) -> Vec<f64> {
        if !self.problem.is_linear() {
            return vec![0.0; self.num_cells()];
        }
        let faces = self.grid.faces();
        let inv_vol = 1.0 / self.grid.cell_volume();
        par::map_indexed(self.exec, self.num_cells(), |i| {
            let mut acc = 0.0;
            for &(fi, sign) in self.grid.cell_faces(i) {
                let f = &faces[fi];
                acc += sign * f.area * f.orientation() * self.problem.flux(1.0, f.midpoint, t, f.axis);
            }
            acc * inv_vol
        })
    }

    /// (1/|K_i|) Σ_j |S_ij| G_ij.
    pub fn divergence(&self, flux: &[f64]) -> Vec<f64> {
        let inv_vol = 1.0 / self.grid.cell_volume();
        let faces = self.grid.faces();
        par::map_indexed(self.exec, self.num_cells(), |i| {
            let mut acc = 0.0;
            for &(fi, sign) in self.grid.cell_faces(i) {
                acc += sign * faces[fi].area * flux[fi];
            }
            acc * inv_vol
        })
    }

    /// Net flux leaving the domain through ghost faces, Σ |S| G.
    pub fn boundary_outflow(&self, flux: &[f64]) -> f64 {
        self.grid
            .faces()
            .iter()
            .zip(flux)
            .filter(|(f, _)| f.neighbor.cell().is_none())
            .map(|(f, g)| f.area * g)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryKind;
    use crate::problems;

    fn unit_face() -> Face {
        let g = StructuredGrid::new_1d(2, 0.0, 1.0, BoundaryKind::Periodic).unwrap();
        g.faces()[0].clone()
    }

    #[test]
    fn rusanov_examples() {
        let lin = problems::linear_advdiff_1d(0.0).unwrap();
        let f = unit_face();
        let x = [0.0; 2];
        assert_eq!(low_order_convective_flux(&lin, &f, 2.0, 0.0, x, x, 0.0, 1.0), 2.0);
        assert_eq!(low_order_convective_flux(&lin, &f, 0.7, 0.7, x, x, 0.0, 1.0), 0.7);
        let burgers = problems::burgers_1d();
        assert_eq!(low_order_convective_flux(&burgers, &f, 0.0, 2.0, x, x, 0.0, 2.0), -1.0);
    }

    #[test]
    fn diffusive_examples() {
        let lin = problems::linear_advdiff_1d(0.001).unwrap();
        let p = low_order_diffusive_flux(&lin, 0.0, 1.0, [0.0, 0.0], [0.1, 0.0]);
        assert!((p - 0.01).abs() < 1e-15);
        let bl = problems::buckley_leverett_1d();
        let p = low_order_diffusive_flux(&bl, 0.0, 1.0, [0.0, 0.0], [0.1, 0.0]);
        assert!((p - 0.01 / 0.1).abs() < 1e-14);
        assert_eq!(low_order_diffusive_flux(&bl, 0.3, 0.3, [0.0, 0.0], [0.1, 0.0]), 0.0);
    }

    #[test]
    fn bar_state_examples() {
        let lin = problems::linear_advdiff_1d(0.0).unwrap();
        let g = StructuredGrid::for_problem(&lin, 2, 1).unwrap();
        let d = Discretization::new(&g, &lin).unwrap();
        let ext = d.extend(&[0.0, 1.0]);
        let bars = d.bar_states(&ext, &[1.0, 1.0], 0.0);
        assert_eq!(bars.advective[0], 0.0);
        assert_eq!(bars.blended[0], 0.0);
        assert_eq!(bars.lambda[0], 1.0);
        let ext = d.extend(&[0.4, 0.4]);
        let bars = d.bar_states(&ext, &[1.0, 1.0], 0.0);
        assert!(bars.blended.iter().all(|&b| b == 0.4));
    }

    #[test]
    fn constant_field_high_order_flux() {
        let p = problems::kpp_2d(0.01).unwrap();
        let g = StructuredGrid::for_problem(&p, 6, 5).unwrap();
        let d = Discretization::new(&g, &p).unwrap();
        let u = vec![1.3; g.num_cells()];
        let ext = d.extend(&u);
        let lam = d.wave_speeds(&ext);
        let gh = d.high_order_flux(&ext, &lam, 0.0);
        for (f, v) in g.faces().iter().zip(&gh) {
            let expect = f.normal[f.axis] * p.flux(1.3, f.midpoint, 0.0, f.axis);
            assert!((v - expect).abs() < 1e-14);
        }
        assert!(d.divergence(&gh).iter().all(|v| v.abs() < 1e-12));
        assert!(d.low_order_rhs(&u, &lam, 0.0).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn high_order_flux_converges_at_fifth_order() {
        let p = problems::linear_advdiff_1d(0.0).unwrap();
        let mut errs = Vec::new();
        for n in [20, 40, 80] {
            let g = StructuredGrid::for_problem(&p, n, 1).unwrap();
            let d = Discretization::new(&g, &p).unwrap();
            let u = problems::cell_averages(&g, |x| x[0].sin());
            let ext = d.extend(&u);
            let gh = d.high_order_flux(&ext, &vec![1.0; n], 0.0);
            let e = g
                .faces()
                .iter()
                .zip(&gh)
                .map(|(f, v)| (v - f.midpoint[0].sin()).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 4.5, "{errs:?}");
        }
    }
}
