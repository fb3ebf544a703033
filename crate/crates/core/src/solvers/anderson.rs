//! Anderson mixing of the pseudo-Jacobian correction sequence.

use std::collections::VecDeque;

/// Mixes the last `depth` corrections d_k = -J^{-1} r(y_k) of the iteration
/// y_{k+1} = y_k + d_k: y_{k+1} = y_k + d_k - Σ_j γ_j (Δy_j + Δd_j) with γ
/// minimizing |d_k - Σ_j γ_j Δd_j|.
#[derive(Debug, Clone)]
pub struct Anderson {
    depth: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    dy: VecDeque<Vec<f64>>,
    dd: VecDeque<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Anderson {
    pub fn new(depth: usize) -> Self {
        Anderson { depth, prev: None, dy: VecDeque::new(), dd: VecDeque::new() }
    }

    /// Drops the difference history; the last iterate is kept.
    pub fn reset(&mut self) {
        self.dy.clear();
        self.dd.clear();
    }

    /// Whether the last call to [`Anderson::next`] mixed in any history.
    pub fn has_history(&self) -> bool {
        !self.dd.is_empty()
    }

    /// Next iterate from the current iterate and its correction.
    pub fn next(&mut self, y: &[f64], d: &[f64]) -> Vec<f64> {
        if let Some((py, pd)) = self.prev.take() {
            if self.depth > 0 {
                self.dy.push_back(y.iter().zip(&py).map(|(a, b)| a - b).collect());
                self.dd.push_back(d.iter().zip(&pd).map(|(a, b)| a - b).collect());
                if self.dy.len() > self.depth {
                    self.dy.pop_front();
                    self.dd.pop_front();
                }
            }
        }
        let gamma = self.coefficients(d);
        let mut out: Vec<f64> = y.iter().zip(d).map(|(a, b)| a + b).collect();
        for (j, g) in gamma.iter().enumerate() {
            if *g != 0.0 {
                for ((o, a), b) in out.iter_mut().zip(&self.dy[j]).zip(&self.dd[j]) {
                    *o -= g * (a + b);
                }
            }
        }
        self.prev = Some((y.to_vec(), d.to_vec()));
        out
    }

    /// Least-squares coefficients by modified Gram-Schmidt, dropping nearly
    /// dependent columns.
    fn coefficients(&self, d: &[f64]) -> Vec<f64> {
        let m = self.dd.len();
        let mut gamma = vec![0.0; m];
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut r: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut kept = Vec::with_capacity(m);
        for (j, col) in self.dd.iter().enumerate() {
            let scale = dot(col, col).sqrt();
            if scale == 0.0 {
                continue;
            }
            let mut v = col.clone();
            let mut rc = Vec::with_capacity(q.len() + 1);
            for qi in &q {
                let c = dot(qi, &v);
                v.iter_mut().zip(qi).for_each(|(a, b)| *a -= c * b);
                rc.push(c);
            }
            let nv = dot(&v, &v).sqrt();
            if nv <= 1e-10 * scale {
                continue;
            }
            v.iter_mut().for_each(|a| *a /= nv);
            rc.push(nv);
            q.push(v);
            r.push(rc);
            kept.push(j);
        }
        let k = q.len();
        let rhs: Vec<f64> = q.iter().map(|qi| dot(qi, d)).collect();
        let mut g = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = rhs[i];
            for (jj, gj) in g.iter().enumerate().skip(i + 1) {
                acc -= r[jj][i] * gj;
            }
            g[i] = acc / r[i][i];
        }
        for (i, &j) in kept.iter().enumerate() {
            gamma[j] = g[i];
        }
        gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_is_plain_iteration() {
        let mut a = Anderson::new(0);
        assert_eq!(a.next(&[1.0, 2.0], &[0.5, -1.0]), vec![1.5, 1.0]);
        assert_eq!(a.next(&[1.5, 1.0], &[0.25, 0.5]), vec![1.75, 1.5]);
    }

    #[test]
    fn linear_contraction_converges_fast() {
        // y = M y + b with a nonnormal contraction; the correction is My + b - y.
        let m = [[0.6, 0.3, 0.0], [0.0, 0.5, 0.2], [0.1, 0.0, 0.7]];
        let b = [1.0, -2.0, 0.5];
        let apply = |y: &[f64]| -> Vec<f64> {
            (0..3).map(|i| (0..3).map(|j| m[i][j] * y[j]).sum::<f64>() + b[i] - y[i]).collect()
        };
        let mut a = Anderson::new(3);
        let mut y = vec![0.0; 3];
        let mut res = f64::INFINITY;
        for _ in 0..6 {
            let d = apply(&y);
            res = dot(&d, &d).sqrt();
            y = a.next(&y, &d);
        }
        // Depth 3 on a 3x3 linear map terminates like GMRES.
        assert!(res < 1e-8, "{res}");
    }
}
