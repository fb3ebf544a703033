//! Sparse matrices on the cell-adjacency pattern and the linear solvers.

use crate::error::{Error, Result};
use crate::mesh::StructuredGrid;

/// Compressed-row matrix whose pattern is the cell plus its face neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseBandedMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag_pos: Vec<usize>,
    /// Grid dimension; 1D matrices are tridiagonal with periodic corners.
    dim: usize,
}

impl SparseBandedMatrix {
    /// Zero matrix with the grid's adjacency pattern (sorted columns).
    pub fn with_grid_pattern(grid: &StructuredGrid) -> Self {
        let n = grid.num_cells();
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for f in grid.faces() {
            if let Some(j) = f.neighbor.cell() {
                rows[f.owner].push(j);
                rows[j].push(f.owner);
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut diag_pos = Vec::with_capacity(n);
        for (i, mut r) in rows.into_iter().enumerate() {
            r.sort_unstable();
            r.dedup();
            diag_pos.push(cols.len() + r.iter().position(|&c| c == i).expect("diagonal present"));
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        SparseBandedMatrix { n, row_ptr, cols, vals: vec![0.0; nnz], diag_pos, dim: grid.dim() }
    }

    /// Matrix holding the nonzeros and the diagonal of a dense array.
    pub fn from_dense(dense: &[Vec<f64>]) -> Self {
        let n = dense.len();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag_pos = Vec::new();
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 || i == j {
                    if i == j {
                        diag_pos.push(cols.len());
                    }
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseBandedMatrix { n, row_ptr, cols, vals, diag_pos, dim: 0 }
    }

    /// Whether both matrices hold bitwise-identical entries on one pattern.
    pub fn same_entries(&self, other: &SparseBandedMatrix) -> bool {
        self.n == other.n
            && self.cols == other.cols
            && self.vals.iter().zip(&other.vals).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Adds `v` to entry (i, j), which must be in the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).expect("entry outside sparsity pattern");
        self.vals[k] += v;
    }

    #[inline]
    fn position(&self, i: usize, j: usize) -> Option<usize> {
        if j == i {
            return Some(self.diag_pos[i]);
        }
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi].iter().position(|&c| c == j).map(|p| lo + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map(|k| self.vals[k]).unwrap_or(0.0)
    }

    /// Row `i` as (column, value) pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] += v;
            }
        }
        d
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (yi, w) in y[..self.n].iter_mut().zip(self.row_ptr.windows(2)) {
            let (lo, hi) = (w[0], w[1]);
            *yi = self.cols[lo..hi].iter().zip(&self.vals[lo..hi]).map(|(&c, v)| v * x[c]).sum();
        }
    }

    pub fn multiply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Prepares a reusable solver for this matrix.
    pub fn factorize(&self) -> Result<Factorization> {
        if self.dim == 1 && self.n >= 3 {
            if let Some(f) = CyclicTridiagonal::new(self) {
                return Ok(Factorization::Tridiagonal(f));
            }
        }
        if self.n <= 64 {
            return Ok(Factorization::Dense(DenseLu::new(self.to_dense())?));
        }
        Ok(Factorization::Krylov(Ilu0::new(self)?))
    }
}

/// Relative residual target of every linear solve.
pub const LINEAR_TOLERANCE: f64 = 1e-13;

/// Solves `matrix x = rhs`.
pub fn linear_solve(matrix: &SparseBandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != matrix.n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has {} entries, matrix has {} rows",
            rhs.len(),
            matrix.n
        )));
    }
    matrix.factorize()?.solve(matrix, rhs)
}

#[derive(Debug, Clone)]
pub enum Factorization {
    Tridiagonal(CyclicTridiagonal),
    Dense(DenseLu),
    /// ILU(0)-preconditioned BiCGSTAB.
    Krylov(Ilu0),
}

impl Factorization {
    /// Solves `matrix x = rhs` using this factorization directly or as a
    /// preconditioner when it was built from a different matrix.
    pub fn solve(&self, matrix: &SparseBandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_to(matrix, rhs, LINEAR_TOLERANCE)
    }

    /// [`Factorization::solve`] with relative residual target `tolerance`
    /// for the iterative path; direct solves are always run to
    /// [`LINEAR_TOLERANCE`].
    pub fn solve_to(&self, matrix: &SparseBandedMatrix, rhs: &[f64], tolerance: f64) -> Result<Vec<f64>> {
        let tolerance = tolerance.max(LINEAR_TOLERANCE);
        let direct = match self {
            Factorization::Tridiagonal(t) => Some(t.solve(rhs)),
            Factorization::Dense(d) => Some(d.solve(rhs)),
            Factorization::Krylov(_) => None,
        };
        if let Some(x) = direct {
            if residual_ok(matrix, &x, rhs) {
                return Ok(x);
            }
            let refined = self.refine(matrix, x, rhs);
            if residual_ok(matrix, &refined, rhs) {
                return Ok(refined);
            }
            return bicgstab(matrix, rhs, LINEAR_TOLERANCE, |r| self.precondition(r));
        }
        bicgstab(matrix, rhs, tolerance, |r| self.precondition(r))
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        match self {
            Factorization::Tridiagonal(t) => t.solve(r),
            Factorization::Dense(d) => d.solve(r),
            Factorization::Krylov(ilu) => ilu.apply(r),
        }
    }

    fn refine(&self, matrix: &SparseBandedMatrix, mut x: Vec<f64>, rhs: &[f64]) -> Vec<f64> {
        for _ in 0..3 {
            let ax = matrix.multiply(&x);
            let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let d = self.precondition(&r);
            x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
        }
        x
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual_ok(matrix: &SparseBandedMatrix, x: &[f64], rhs: &[f64]) -> bool {
    let ax = matrix.multiply(x);
    let r: f64 = rhs.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt();
    r.is_finite() && r <= LINEAR_TOLERANCE * norm(rhs).max(f64::MIN_POSITIVE)
}

/// Right-preconditioned BiCGSTAB to relative residual `tolerance`.
fn bicgstab(
    a: &SparseBandedMatrix,
    b: &[f64],
    tolerance: f64,
    prec: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let n = a.n;
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let target = tolerance * bnorm;
    let mut r = b.to_vec();
    let mut best = (norm(&r), x.clone());
    for _restart in 0..5 {
        let r0 = r.clone();
        let mut rho = 1.0;
        let mut alpha = 1.0;
        let mut omega = 1.0;
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut t = vec![0.0; n];
        for _ in 0..2 * n.max(50) {
            let rho_new = dot(&r0, &r);
            if rho_new.abs() < 1e-300 {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            let ph = prec(&p);
            a.matvec(&ph, &mut v);
            let r0v = dot(&r0, &v);
            if r0v.abs() < 1e-300 {
                break;
            }
            alpha = rho / r0v;
            let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
            if norm(&s) <= target {
                x.iter_mut().zip(&ph).for_each(|(xi, pi)| *xi += alpha * pi);
                return Ok(x);
            }
            let sh = prec(&s);
            a.matvec(&sh, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                break;
            }
            omega = dot(&t, &s) / tt;
            for i in 0..n {
                x[i] += alpha * ph[i] + omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
            let rn = norm(&r);
            if rn < best.0 {
                best = (rn, x.clone());
            }
            if rn <= target {
                return Ok(x);
            }
            if omega == 0.0 || !rn.is_finite() {
                break;
            }
        }
        // Restart from the true residual of the best iterate.
        x = best.1.clone();
        let ax = a.multiply(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        if norm(&r) <= target {
            return Ok(x);
        }
    }
    Err(Error::NotConverged {
        solver: "bicgstab",
        iterations: 0,
        residual: best.0 / bnorm,
        tolerance,
    })
}

/// Thomas algorithm with a Sherman-Morrison correction for the corners.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Entry (0, n-1) and (n-1, 0).
    corner_top: f64,
    corner_bottom: f64,
}

impl CyclicTridiagonal {
    fn new(m: &SparseBandedMatrix) -> Option<Self> {
        let n = m.n;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut corner_top = 0.0;
        let mut corner_bottom = 0.0;
        for i in 0..n {
            for (j, v) in m.row(i) {
                if j == i {
                    diag[i] = v;
                } else if j + 1 == i {
                    lower[i] = v;
                } else if j == i + 1 {
                    upper[i] = v;
                } else if i == 0 && j == n - 1 {
                    corner_top = v;
                } else if i == n - 1 && j == 0 {
                    corner_bottom = v;
                } else {
                    return None;
                }
            }
        }
        Some(CyclicTridiagonal { lower, diag, upper, corner_top, corner_bottom })
    }

    fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
        let n = diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = upper[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - lower[i] * c[i - 1];
            c[i] = upper[i] / m;
            d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        if self.corner_top == 0.0 && self.corner_bottom == 0.0 {
            return Self::thomas(&self.lower, &self.diag, &self.upper, rhs);
        }
        // A = B + u v^T with u = (g, 0.., corner_bottom), v = (1, 0.., corner_top / g).
        let g = -self.diag[0];
        let mut diag = self.diag.clone();
        diag[0] -= g;
        diag[n - 1] -= self.corner_bottom * self.corner_top / g;
        let y = Self::thomas(&self.lower, &diag, &self.upper, rhs);
        let mut u = vec![0.0; n];
        u[0] = g;
        u[n - 1] = self.corner_bottom;
        let z = Self::thomas(&self.lower, &diag, &self.upper, &u);
        let vy = y[0] + self.corner_top / g * y[n - 1];
        let vz = z[0] + self.corner_top / g * z[n - 1];
        let f = vy / (1.0 + vz);
        y.iter().zip(&z).map(|(yi, zi)| yi - f * zi).collect()
    }
}

/// Dense LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn new(mut a: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .expect("nonempty range");
            if a[p][k].abs() < 1e-300 {
                return Err(Error::SingularMatrix("dense LU pivot"));
            }
            a.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..n {
                let l = a[i][k] / a[k][k];
                a[i][k] = l;
                for j in k + 1..n {
                    a[i][j] -= l * a[k][j];
                }
            }
        }
        Ok(DenseLu { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i][j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i][j] * x[j];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }
}

/// Incomplete LU factorization with zero fill on the matrix pattern.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(m: &SparseBandedMatrix) -> Result<Self> {
        let n = m.n;
        let mut vals = m.vals.clone();
        let row_ptr = m.row_ptr.clone();
        let cols = m.cols.clone();
        let diag_pos = m.diag_pos.clone();
        let mut col_pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                col_pos[cols[k]] = k;
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                let j = cols[k];
                if j >= i {
                    continue;
                }
                let piv = vals[diag_pos[j]];
                if piv.abs() < 1e-300 {
                    return Err(Error::SingularMatrix("ILU(0) pivot"));
                }
                let l = vals[k] / piv;
                vals[k] = l;
                for kk in row_ptr[j]..row_ptr[j + 1] {
                    let c = cols[kk];
                    if c > j {
                        let pos = col_pos[c];
                        if pos != usize::MAX {
                            vals[pos] -= l * vals[kk];
                        }
                    }
                }
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                col_pos[cols[k]] = usize::MAX;
            }
            if vals[diag_pos[i]].abs() < 1e-300 {
                return Err(Error::SingularMatrix("ILU(0) pivot"));
            }
        }
        Ok(Ilu0 { row_ptr, cols, vals, diag_pos })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = self.diag_pos.len();
        let mut x = r.to_vec();
        for i in 0..n {
            let (lo, d) = (self.row_ptr[i], self.diag_pos[i]);
            let s: f64 = self.cols[lo..d].iter().zip(&self.vals[lo..d]).map(|(&c, v)| v * x[c]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let (d, hi) = (self.diag_pos[i], self.row_ptr[i + 1]);
            let s: f64 = self.cols[d + 1..hi].iter().zip(&self.vals[d + 1..hi]).map(|(&c, v)| v * x[c]).sum();
            x[i] = (x[i] - s) / self.vals[d];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryKind;

    fn laplacian_1d(n: usize, periodic: bool) -> SparseBandedMatrix {
        let kind = if periodic { BoundaryKind::Periodic } else { BoundaryKind::Dirichlet };
        let g = StructuredGrid::new_1d(n, 0.0, 1.0, kind).unwrap();
        let mut m = SparseBandedMatrix::with_grid_pattern(&g);
        for i in 0..n {
            m.add(i, i, 2.5);
            if periodic || i > 0 {
                m.add(i, (i + n - 1) % n, -1.0);
            }
            if periodic || i + 1 < n {
                m.add(i, (i + 1) % n, -1.2);
            }
        }
        m
    }

    #[test]
    fn identity_solve() {
        let m = SparseBandedMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(linear_solve(&m, &[3.0, -2.0]).unwrap(), vec![3.0, -2.0]);
    }

    #[test]
    fn tridiagonal_roundtrip() {
        for periodic in [false, true] {
            let m = laplacian_1d(37, periodic);
            let x: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = m.multiply(&x);
            let y = linear_solve(&m, &b).unwrap();
            for (a, e) in y.iter().zip(&x) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_d_krylov_roundtrip() {
        let g = StructuredGrid::new_2d(12, 10, [0.0; 2], [1.0; 2], [BoundaryKind::Periodic; 2])
            .unwrap();
        let mut m = SparseBandedMatrix::with_grid_pattern(&g);
        for f in g.faces() {
            let j = f.neighbor.cell().unwrap();
            m.add(f.owner, f.owner, 1.1);
            m.add(f.owner, j, -0.9);
            m.add(j, j, 1.0);
            m.add(j, f.owner, -1.0);
        }
        for i in 0..g.num_cells() {
            m.add(i, i, 1.0);
        }
        let x: Vec<f64> = (0..g.num_cells()).map(|i| (i as f64).cos()).collect();
        let b = m.multiply(&x);
        let y = linear_solve(&m, &b).unwrap();
        let r: Vec<f64> = m.multiply(&y).iter().zip(&b).map(|(a, c)| a - c).collect();
        assert!(norm(&r) <= 1e-13 * norm(&b));
    }

    #[test]
    fn singular_dense() {
        let m = SparseBandedMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(linear_solve(&m, &[1.0, 1.0]).is_err());
    }
}
