//! Uniform structured grids in one and two dimensions.
//!
//! Cells are stored row-major with x fastest. Faces are enumerated x-faces
//! first (row by row), then y-faces. Each face has an owner cell and a
//! neighbor slot, which is either another cell or a ghost layer on a
//! Dirichlet boundary; the stored normal points from owner to neighbor.

use crate::error::{Error, Result};
use crate::problems::{Boundary, ProblemSpec};

/// Ghost layers per side needed by the five-cell reconstruction stencils.
pub const GHOST_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
}

/// One side of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Cell(usize),
    Ghost,
}

impl Slot {
    pub fn cell(self) -> Option<usize> {
        match self {
            Slot::Cell(i) => Some(i),
            Slot::Ghost => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub owner: usize,
    pub neighbor: Slot,
    pub axis: usize,
    /// Unit normal pointing from owner to neighbor.
    pub normal: [f64; 2],
    pub area: f64,
    pub midpoint: [f64; 2],
    /// Distance |x_j - x_i| between the two cell centers.
    pub distance: f64,
    /// Slot on the low-coordinate side along `axis`.
    pub lower: Slot,
    /// Slot on the high-coordinate side along `axis`.
    pub upper: Slot,
    /// Grid coordinates of the lower cell; may be -1 for a ghost.
    pub(crate) lower_ij: [isize; 2],
    /// +1 when the owner is the lower cell, -1 otherwise.
    pub(crate) orientation: f64,
}

impl Face {
    /// The same geometric face seen from the neighbor cell, if it is a cell.
    pub fn viewed_from_neighbor(&self) -> Option<Face> {
        let nb = self.neighbor.cell()?;
        Some(Face {
            owner: nb,
            neighbor: Slot::Cell(self.owner),
            normal: [-self.normal[0], -self.normal[1]],
            orientation: -self.orientation,
            ..self.clone()
        })
    }

    /// Sign converting a lower-to-upper quantity into owner orientation.
    #[inline]
    pub fn orientation(&self) -> f64 {
        self.orientation
    }
}

#[derive(Debug, Clone)]
pub struct StructuredGrid {
    dim: usize,
    cells: [usize; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    spacing: [f64; 2],
    boundary: [BoundaryKind; 2],
    faces: Vec<Face>,
    // CSR adjacency: faces touching each cell with the divergence sign.
    cell_face_offsets: Vec<usize>,
    cell_face_entries: Vec<(usize, f64)>,
}

impl StructuredGrid {
    pub fn new_1d(n: usize, lo: f64, hi: f64, boundary: BoundaryKind) -> Result<Self> {
        Self::build(
            1,
            [n, 1],
            [lo, 0.0],
            [hi, 1.0],
            [boundary, BoundaryKind::Periodic],
        )
    }

    pub fn new_2d(
        nx: usize,
        ny: usize,
        lo: [f64; 2],
        hi: [f64; 2],
        boundary: [BoundaryKind; 2],
    ) -> Result<Self> {
        Self::build(2, [nx, ny], lo, hi, boundary)
    }

    /// Grid over the problem's domain with its boundary kinds.
    pub fn for_problem(problem: &ProblemSpec, nx: usize, ny: usize) -> Result<Self> {
        let kinds = [problem.boundary[0].kind(), problem.boundary[1].kind()];
        if problem.dim == 1 {
            Self::new_1d(nx, problem.domain_lo[0], problem.domain_hi[0], kinds[0])
        } else {
            Self::new_2d(nx, ny, problem.domain_lo, problem.domain_hi, kinds)
        }
    }

    fn build(
        dim: usize,
        cells: [usize; 2],
        lo: [f64; 2],
        hi: [f64; 2],
        boundary: [BoundaryKind; 2],
    ) -> Result<Self> {
        for axis in 0..dim {
            if cells[axis] == 0 {
                return Err(Error::InvalidArgument(format!("axis {axis} has zero cells")));
            }
            if !(hi[axis] > lo[axis]) || !lo[axis].is_finite() || !hi[axis].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "axis {axis}: domain [{}, {}] is empty",
                    lo[axis], hi[axis]
                )));
            }
        }
        let spacing = [
            (hi[0] - lo[0]) / cells[0] as f64,
            if dim == 2 { (hi[1] - lo[1]) / cells[1] as f64 } else { 1.0 },
        ];
        let mut grid = StructuredGrid {
            dim,
            cells,
            lo,
            hi,
            spacing,
            boundary,
            faces: Vec::new(),
            cell_face_offsets: Vec::new(),
            cell_face_entries: Vec::new(),
        };
        grid.faces = grid.enumerate_faces();
        grid.build_adjacency();
        Ok(grid)
    }

    fn enumerate_faces(&self) -> Vec<Face> {
        let mut faces = Vec::new();
        let [nx, ny] = self.cells;
        for axis in 0..self.dim {
            let n_along = self.cells[axis];
            let n_across = if axis == 0 { ny } else { nx };
            let h = self.spacing[axis];
            let area = if self.dim == 1 { 1.0 } else { self.spacing[1 - axis] };
            let periodic = self.boundary[axis] == BoundaryKind::Periodic;
            let n_faces = if periodic { n_along } else { n_along + 1 };
            for t in 0..n_across {
                for k in 0..n_faces {
                    // Lower cell index along the axis; -1 denotes the ghost.
                    let (lower_k, face_pos) = if periodic {
                        (k as isize, (k + 1) as f64)
                    } else {
                        (k as isize - 1, k as f64)
                    };
                    let upper_k = lower_k + 1;
                    let cell_at = |along: isize| -> Slot {
                        let along = if periodic {
                            along.rem_euclid(n_along as isize)
                        } else if along < 0 || along >= n_along as isize {
                            return Slot::Ghost;
                        } else {
                            along
                        } as usize;
                        let idx = if axis == 0 { along + t * nx } else { t + along * nx };
                        Slot::Cell(idx)
                    };
                    let lower = cell_at(lower_k);
                    let upper = cell_at(upper_k);
                    let mut normal = [0.0; 2];
                    let (owner, neighbor, orientation) = match lower {
                        Slot::Cell(i) => {
                            normal[axis] = 1.0;
                            (i, upper, 1.0)
                        }
                        Slot::Ghost => {
                            normal[axis] = -1.0;
                            (upper.cell().expect("face between two ghosts"), lower, -1.0)
                        }
                    };
                    let mut midpoint = [0.0; 2];
                    midpoint[axis] = self.lo[axis] + face_pos * h;
                    if self.dim == 2 {
                        let other = 1 - axis;
                        midpoint[other] =
                            self.lo[other] + (t as f64 + 0.5) * self.spacing[other];
                    }
                    let lower_ij = if axis == 0 {
                        [lower_k, t as isize]
                    } else {
                        [t as isize, lower_k]
                    };
                    faces.push(Face {
                        owner,
                        neighbor,
                        axis,
                        normal,
                        area,
                        midpoint,
                        distance: h,
                        lower,
                        upper,
                        lower_ij,
                        orientation,
                    });
                }
            }
        }
        faces
    }

    fn build_adjacency(&mut self) {
        let n = self.num_cells();
        let mut counts = vec![0usize; n + 1];
        for f in &self.faces {
            counts[f.owner + 1] += 1;
            if let Slot::Cell(j) = f.neighbor {
                counts[j + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); counts[n]];
        for (fi, f) in self.faces.iter().enumerate() {
            entries[fill[f.owner]] = (fi, 1.0);
            fill[f.owner] += 1;
            if let Slot::Cell(j) = f.neighbor {
                entries[fill[j]] = (fi, -1.0);
                fill[j] += 1;
            }
        }
        self.cell_face_offsets = counts;
        self.cell_face_entries = entries;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> [usize; 2] {
        self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn domain(&self) -> ([f64; 2], [f64; 2]) {
        (self.lo, self.hi)
    }

    pub fn boundary(&self) -> [BoundaryKind; 2] {
        self.boundary
    }

    /// |K_i|, identical for every cell.
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.spacing[0]
        } else {
            self.spacing[0] * self.spacing[1]
        }
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Faces of a cell with sign +1 where the cell owns the face, -1 otherwise.
    pub fn cell_faces(&self, cell: usize) -> &[(usize, f64)] {
        &self.cell_face_entries[self.cell_face_offsets[cell]..self.cell_face_offsets[cell + 1]]
    }

    pub fn cell_ij(&self, cell: usize) -> [usize; 2] {
        [cell % self.cells[0], cell / self.cells[0]]
    }

    /// Midpoint of cell K_i.
    pub fn cell_center(&self, cell: usize) -> Result<[f64; 2]> {
        if cell >= self.num_cells() {
            return Err(Error::IndexOutOfRange { index: cell, count: self.num_cells() });
        }
        Ok(self.center_unchecked(cell))
    }

    pub(crate) fn center_unchecked(&self, cell: usize) -> [f64; 2] {
        let [i, j] = self.cell_ij(cell);
        self.center_of_ij([i as isize, j as isize])
    }

    /// Center of a (possibly ghost) cell given by signed grid coordinates.
    pub(crate) fn center_of_ij(&self, ij: [isize; 2]) -> [f64; 2] {
        let x = self.lo[0] + (ij[0] as f64 + 0.5) * self.spacing[0];
        let y = if self.dim == 2 {
            self.lo[1] + (ij[1] as f64 + 0.5) * self.spacing[1]
        } else {
            0.0
        };
        [x, y]
    }

    /// All cell centers in storage order.
    pub fn centers(&self) -> Vec<[f64; 2]> {
        (0..self.num_cells()).map(|c| self.center_unchecked(c)).collect()
    }

    /// Sum of |S_ij| n_ij over the faces of a cell (zero for a closed cell).
    pub fn closure_defect(&self, cell: usize) -> [f64; 2] {
        let mut acc = [0.0; 2];
        for &(fi, sign) in self.cell_faces(cell) {
            let f = &self.faces[fi];
            acc[0] += sign * f.area * f.normal[0];
            acc[1] += sign * f.area * f.normal[1];
        }
        acc
    }

    /// Flux divergence (1/|K_i|) sum_j |S_ij| G_ij for owner-oriented face values.
    pub fn divergence(&self, flux: &[f64]) -> Vec<f64> {
        let inv_vol = 1.0 / self.cell_volume();
        crate::par::map_indexed(crate::par::Exec::auto(), self.num_cells(), |c| {
            let mut acc = 0.0;
            for &(fi, sign) in self.cell_faces(c) {
                acc += sign * self.faces[fi].area * flux[fi];
            }
            acc * inv_vol
        })
    }
}

/// Cell averages u_i, one per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    values: Vec<f64>,
}

impl CellField {
    pub fn new(grid: &StructuredGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_cells() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.num_cells()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at cell {i}")));
        }
        Ok(CellField { values })
    }

    pub fn constant(grid: &StructuredGrid, value: f64) -> Self {
        CellField { values: vec![value; grid.num_cells()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl std::ops::Deref for CellField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// A cell field padded with ghost layers along every active axis.
#[derive(Debug, Clone)]
pub struct ExtendedField {
    values: Vec<f64>,
    width: usize,
    ext_nx: usize,
    dim: usize,
    cells: [usize; 2],
}

impl ExtendedField {
    #[inline]
    pub fn index(&self, ij: [isize; 2]) -> usize {
        let w = self.width as isize;
        let wy = if self.dim == 2 { w } else { 0 };
        ((ij[0] + w) + (ij[1] + wy) * self.ext_nx as isize) as usize
    }

    #[inline]
    pub fn get(&self, ij: [isize; 2]) -> f64 {
        self.values[self.index(ij)]
    }

    /// Index step between neighbors along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.ext_nx
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    /// Five consecutive values along `axis` centered on `ij`.
    #[inline]
    pub fn stencil(&self, ij: [isize; 2], axis: usize) -> [f64; 5] {
        let c = self.index(ij);
        let s = self.stride(axis);
        [
            self.values[c - 2 * s],
            self.values[c - s],
            self.values[c],
            self.values[c + s],
            self.values[c + 2 * s],
        ]
    }

    /// The interior values in storage order.
    pub fn interior(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cells[0] * self.cells[1]);
        for j in 0..self.cells[1] as isize {
            for i in 0..self.cells[0] as isize {
                out.push(self.get([i, j]));
            }
        }
        out
    }
}

/// Pads `field` with `width` ghost layers per side: periodic axes wrap,
/// Dirichlet axes repeat the prescribed boundary value.
pub fn ghost_fill(
    grid: &StructuredGrid,
    field: &[f64],
    problem: &ProblemSpec,
    width: usize,
) -> Result<ExtendedField> {
    if width == 0 {
        return Err(Error::InvalidArgument("ghost width must be at least 1".into()));
    }
    if field.len() != grid.num_cells() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values, grid has {} cells",
            field.len(),
            grid.num_cells()
        )));
    }
    let mut dirichlet = [None; 2];
    for axis in 0..grid.dim() {
        if grid.boundary[axis] == BoundaryKind::Dirichlet {
            match problem.boundary[axis] {
                Boundary::Dirichlet { lower, upper } => dirichlet[axis] = Some((lower, upper)),
                Boundary::Periodic => return Err(Error::MissingBoundaryValue { axis }),
            }
        }
    }
    Ok(ghost_fill_with(grid, field, dirichlet, width))
}

pub(crate) fn ghost_fill_with(
    grid: &StructuredGrid,
    field: &[f64],
    dirichlet: [Option<(f64, f64)>; 2],
    width: usize,
) -> ExtendedField {
    let [nx, ny] = grid.cells;
    let dim = grid.dim;
    let ext_nx = nx + 2 * width;
    let ext_ny = if dim == 2 { ny + 2 * width } else { 1 };
    let w = width as isize;
    let wy = if dim == 2 { w } else { 0 };
    let mut values = vec![0.0; ext_nx * ext_ny];
    for ej in 0..ext_ny as isize {
        for ei in 0..ext_nx as isize {
            let mut ij = [ei - w, ej - wy];
            let mut fixed = None;
            for axis in 0..dim {
                let n = grid.cells[axis] as isize;
                if ij[axis] < 0 || ij[axis] >= n {
                    match dirichlet[axis] {
                        None => ij[axis] = ij[axis].rem_euclid(n),
                        Some((lower, upper)) => {
                            if fixed.is_none() {
                                fixed = Some(if ij[axis] < 0 { lower } else { upper });
                            }
                        }
                    }
                }
            }
            let v = match fixed {
                Some(v) => v,
                None => field[ij[0] as usize + ij[1] as usize * nx],
            };
            values[ei as usize + ej as usize * ext_nx] = v;
        }
    }
    ExtendedField { values, width, ext_nx, dim, cells: grid.cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;
    use std::f64::consts::PI;

    #[test]
    fn cell_centers() {
        let g = StructuredGrid::new_1d(4, 0.0, 1.0, BoundaryKind::Periodic).unwrap();
        assert_eq!(g.cell_center(0).unwrap()[0], 0.125);
        let g = StructuredGrid::new_1d(2, 0.0, 2.0 * PI, BoundaryKind::Periodic).unwrap();
        assert!((g.cell_center(1).unwrap()[0] - 1.5 * PI).abs() < 1e-15);
        let g = StructuredGrid::new_2d(2, 2, [0.0; 2], [1.0; 2], [BoundaryKind::Periodic; 2])
            .unwrap();
        assert_eq!(g.cell_center(1).unwrap(), [0.75, 0.25]);
        assert!(matches!(g.cell_center(4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn face_counts() {
        let g = StructuredGrid::new_1d(3, 0.0, 1.0, BoundaryKind::Periodic).unwrap();
        assert_eq!(g.faces().len(), 3);
        assert!(g.faces().iter().all(|f| f.area == 1.0 && f.normal[0] == 1.0));
        assert_eq!(g.faces()[2].owner, 2);
        assert_eq!(g.faces()[2].neighbor, Slot::Cell(0));

        let g = StructuredGrid::new_2d(2, 2, [0.0; 2], [1.0; 2], [BoundaryKind::Periodic; 2])
            .unwrap();
        assert_eq!(g.faces().len(), 8);
        assert_eq!(g.faces().iter().filter(|f| f.axis == 0).count(), 4);

        let g = StructuredGrid::new_1d(3, 0.0, 1.0, BoundaryKind::Dirichlet).unwrap();
        assert_eq!(g.faces().len(), 4);
        let ghosts: Vec<_> = g.faces().iter().filter(|f| f.neighbor == Slot::Ghost).collect();
        assert_eq!(ghosts.len(), 2);
        assert_eq!(ghosts[0].normal[0], -1.0);
        assert_eq!(ghosts[0].owner, 0);
        assert_eq!(ghosts[1].owner, 2);
    }

    #[test]
    fn faces_close_every_cell() {
        for g in [
            StructuredGrid::new_1d(5, 0.0, 1.0, BoundaryKind::Dirichlet).unwrap(),
            StructuredGrid::new_2d(3, 4, [0.0; 2], [1.0, 2.0], [BoundaryKind::Periodic; 2])
                .unwrap(),
            StructuredGrid::new_2d(
                3,
                2,
                [0.0; 2],
                [1.0; 2],
                [BoundaryKind::Dirichlet, BoundaryKind::Periodic],
            )
            .unwrap(),
        ] {
            for c in 0..g.num_cells() {
                let d = g.closure_defect(c);
                assert!(d[0].abs() < 1e-15 && d[1].abs() < 1e-15, "cell {c}: {d:?}");
            }
        }
    }

    #[test]
    fn neighbor_view_is_antisymmetric() {
        let g = StructuredGrid::new_2d(3, 3, [0.0; 2], [1.0; 2], [BoundaryKind::Periodic; 2])
            .unwrap();
        for f in g.faces() {
            let r = f.viewed_from_neighbor().unwrap();
            assert_eq!(r.normal, [-f.normal[0], -f.normal[1]]);
            assert_eq!(r.area, f.area);
            assert_eq!(r.midpoint, f.midpoint);
            assert_eq!(r.neighbor, Slot::Cell(f.owner));
        }
    }

    #[test]
    fn periodic_ghosts_wrap() {
        let p = problems::linear_advdiff_1d(0.0).unwrap();
        let g = StructuredGrid::new_1d(3, 0.0, 1.0, BoundaryKind::Periodic).unwrap();
        let e = ghost_fill(&g, &[1.0, 2.0, 3.0], &p, 2).unwrap();
        assert_eq!(e.raw(), &[2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0]);
        assert_eq!(e.interior(), vec![1.0, 2.0, 3.0]);
        let e = ghost_fill(&g, &[0.5; 3], &p, 3).unwrap();
        assert!(e.raw().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn dirichlet_ghosts_use_boundary_values() {
        let p = problems::buckley_leverett_1d();
        let g = StructuredGrid::for_problem(&p, 3, 1).unwrap();
        let e = ghost_fill(&g, &[0.7, 0.2, 0.1], &p, 1).unwrap();
        assert_eq!(e.raw(), &[1.0, 0.7, 0.2, 0.1, 0.0]);

        let periodic = problems::burgers_1d();
        assert!(matches!(
            ghost_fill(&g, &[0.0; 3], &periodic, 1),
            Err(Error::MissingBoundaryValue { axis: 0 })
        ));
        assert!(ghost_fill(&g, &[0.0; 3], &p, 0).is_err());
    }

    #[test]
    fn two_d_fill_wraps_both_axes() {
        let p = problems::linear_advdiff_2d(0.0).unwrap();
        let g = StructuredGrid::for_problem(&p, 3, 2).unwrap();
        let vals: Vec<f64> = (0..6).map(|v| v as f64).collect();
        let e = ghost_fill(&g, &vals, &p, 3).unwrap();
        assert_eq!(e.get([-1, 0]), 2.0);
        assert_eq!(e.get([0, -1]), 3.0);
        assert_eq!(e.get([4, 3]), 4.0);
        assert_eq!(e.interior(), vals);
    }
}
