//! Butcher tableaus of diagonally implicit Runge-Kutta methods.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub name: String,
    /// Lower-triangular coefficients a_ms, row-major.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    pub fn new(name: impl Into<String>, a: Vec<Vec<f64>>, b: Vec<f64>, order: usize) -> Result<Self> {
        let m = b.len();
        if m == 0 || a.len() != m || a.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidArgument("tableau must be square with matching weights".into()));
        }
        for (i, row) in a.iter().enumerate() {
            if row[i + 1..].iter().any(|&x| x != 0.0) {
                return Err(Error::InvalidArgument(format!("row {i} has entries above the diagonal")));
            }
        }
        let c = a.iter().map(|row| row.iter().sum()).collect();
        Ok(ButcherTableau { name: name.into(), a, b, c, order })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.stages()).map(|i| self.a[i][i]).collect()
    }

    /// Checks lower-triangularity, row sums against c and Σ b = 1.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.a.iter().enumerate() {
            if row[i + 1..].iter().any(|&x| x != 0.0) {
                return Err(Error::InvalidArgument(format!("row {i} is not lower triangular")));
            }
            let s: f64 = row.iter().sum();
            if (s - self.c[i]).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("row {i} sums to {s}, c = {}", self.c[i])));
            }
        }
        let sb: f64 = self.b.iter().sum();
        if (sb - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {sb}")));
        }
        Ok(())
    }
}

pub fn backward_euler_tableau() -> ButcherTableau {
    ButcherTableau::new("be", vec![vec![1.0]], vec![1.0], 1).expect("valid tableau")
}

fn q(num: i64, den: i64) -> f64 {
    num as f64 / den as f64
}

/// Five-stage, fifth-order singly diagonally implicit method.
pub fn sdirk5_tableau() -> ButcherTableau {
    let g = q(4024571134387, 14474071345096);
    let a = vec![
        vec![g, 0.0, 0.0, 0.0, 0.0],
        vec![q(9365021263232, 12572342979331), g, 0.0, 0.0, 0.0],
        vec![q(2144716224527, 9320917548702), q(-397905335951, 4008788611757), g, 0.0, 0.0],
        vec![
            q(-291541413000, 6267936762551),
            q(226761949132, 4473940808273),
            q(-1282248297070, 9697416712681),
            g,
            0.0,
        ],
        vec![
            q(-2481679516057, 4626464057815),
            q(-197112422687, 6604378783090),
            q(3952887910906, 9713059315593),
            q(4906835613583, 8134926921134),
            g,
        ],
    ];
    let b = vec![
        q(-2522702558582, 12162329469185),
        q(1018267903655, 12907234417901),
        q(4542392826351, 13702606430957),
        q(5001116467727, 12224457745473),
        q(1509636094297, 3891594770934),
    ];
    let mut t = ButcherTableau::new("sdirk5", a, b, 5).expect("valid tableau");
    // The published abscissae are rounded rationals of the row sums.
    t.c = vec![
        g,
        q(5555633399575, 5431021154178),
        q(5255299487392, 12852514622453),
        q(3, 20),
        q(10449500210709, 14474071345096),
    ];
    t
}

/// Weights w_k combining the first-order values T_k1, k = 1..p, into T_pp
/// by the Aitken-Neville recursion.
pub fn extrapolation_weights(p: usize) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::InvalidArgument("extrapolation order must be at least 1".into()));
    }
    // Row j of the table holds T_{j,k} as coefficient vectors over T_{.,1}.
    let mut prev: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            e
        })
        .collect();
    for k in 2..=p {
        let mut next = prev.clone();
        for j in k..=p {
            let factor = j as f64 / (j - k + 1) as f64 - 1.0;
            for idx in 0..p {
                next[j - 1][idx] =
                    prev[j - 1][idx] + (prev[j - 1][idx] - prev[j - 2][idx]) / factor;
            }
        }
        prev = next;
    }
    Ok(prev[p - 1].clone())
}

/// Stage index of substep `j` (1-based) of chain `k` (1-based).
pub fn iex_stage_index(k: usize, j: usize) -> usize {
    k * (k - 1) / 2 + (j - 1)
}

/// Runge-Kutta form of implicit Euler extrapolation of order p: chain k
/// takes k implicit Euler substeps of size 1/k.
pub fn iex_tableau(p: usize) -> Result<ButcherTableau> {
    let w = extrapolation_weights(p)?;
    let m = p * (p + 1) / 2;
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for k in 1..=p {
        for j in 1..=k {
            let row = iex_stage_index(k, j);
            for s in 1..=j {
                a[row][iex_stage_index(k, s)] = 1.0 / k as f64;
            }
            b[row] = w[k - 1] / k as f64;
        }
    }
    let mut t = ButcherTableau::new(format!("iex{p}"), a, b, p)?;
    for k in 1..=p {
        for j in 1..=k {
            t.c[iex_stage_index(k, j)] = j as f64 / k as f64;
        }
    }
    Ok(t)
}

/// True iff A X(μ) ≥ 0 and A X(μ) e ≤ e entrywise, X(μ) = (I + μA)^{-1}.
pub fn check_ssp_stages(tableau: &ButcherTableau, mu: f64) -> Result<bool> {
    let m = tableau.stages();
    let a = &tableau.a;
    // X is lower triangular; solve (I + μA) X = I column by column.
    let mut x = vec![vec![0.0; m]; m];
    for col in 0..m {
        for row in col..m {
            let mut rhs = if row == col { 1.0 } else { 0.0 };
            for s in col..row {
                rhs -= mu * a[row][s] * x[s][col];
            }
            let d = 1.0 + mu * a[row][row];
            if d.abs() < 1e-300 {
                return Err(Error::SingularMatrix("I + mu A"));
            }
            x[row][col] = rhs / d;
        }
    }
    const TOL: f64 = 1e-12;
    for row in 0..m {
        let mut row_sum = 0.0;
        for col in 0..m {
            let ax: f64 = (0..m).map(|s| a[row][s] * x[s][col]).sum();
            if ax < -TOL {
                return Ok(false);
            }
            row_sum += ax;
        }
        if row_sum > 1.0 + TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Scheme tableau by name: `be`, `sdirk5`, `iex1`..`iex4` (any order accepted).
pub fn tableau_by_name(name: &str) -> Result<ButcherTableau> {
    match name {
        "be" => Ok(backward_euler_tableau()),
        "sdirk5" => Ok(sdirk5_tableau()),
        _ => match name.strip_prefix("iex").and_then(|p| p.parse::<usize>().ok()) {
            Some(p) if p >= 1 => iex_tableau(p),
            _ => Err(Error::UnknownName { kind: "scheme", name: name.to_string() }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tableaus_validate() {
        backward_euler_tableau().validate().unwrap();
        sdirk5_tableau().validate().unwrap();
        for p in 1..=5 {
            iex_tableau(p).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn sdirk5_diagonal() {
        let t = sdirk5_tableau();
        assert!((t.a[0][0] - 0.2780538411).abs() < 1e-10);
        assert!(t.diagonal().iter().all(|&d| d == t.a[0][0]));
    }

    #[test]
    fn iex_weights() {
        let t = iex_tableau(4).unwrap();
        let expect = [
            -1.0 / 6.0, 2.0, 2.0, -4.5, -4.5, -4.5, 8.0 / 3.0, 8.0 / 3.0, 8.0 / 3.0, 8.0 / 3.0,
        ];
        for (b, e) in t.b.iter().zip(expect) {
            assert!((b - e).abs() < 1e-13, "{b} vs {e}");
        }
        assert_eq!(iex_tableau(2).unwrap().b, vec![-1.0, 1.0, 1.0]);
        assert_eq!(iex_tableau(1).unwrap().a, backward_euler_tableau().a);
        assert!(iex_tableau(0).is_err());
    }

    #[test]
    fn iex4_matches_block_structure() {
        let t = iex_tableau(4).unwrap();
        // Chain 3 occupies stages 3..6 with entries 1/3 on and below the diagonal.
        assert_eq!(t.a[5][3], 1.0 / 3.0);
        assert_eq!(t.a[5][5], 1.0 / 3.0);
        assert_eq!(t.a[5][2], 0.0);
        assert_eq!(t.c[5], 1.0);
        assert_eq!(t.c[6], 0.25);
    }

    #[test]
    fn ssp_checks() {
        let be = backward_euler_tableau();
        for mu in [0.1, 1.0, 1e6] {
            assert!(check_ssp_stages(&be, mu).unwrap());
        }
        let iex4 = iex_tableau(4).unwrap();
        for mu in [1.0, 1e3, 1e6] {
            assert!(check_ssp_stages(&iex4, mu).unwrap());
        }
        assert!(!check_ssp_stages(&sdirk5_tableau(), 1e3).unwrap());
        assert!(matches!(check_ssp_stages(&be, -1.0), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn names() {
        assert_eq!(tableau_by_name("iex3").unwrap().stages(), 6);
        assert!(tableau_by_name("rk4").is_err());
        assert!(tableau_by_name("iex0").is_err());
    }
}
