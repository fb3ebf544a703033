//! Independent checks of the limiter, the pseudo-Jacobian, the WENO
//! reconstruction, the bar states and the IEX paths. Each returns a summary
//! on success and the first violation otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mppfv::fluxes::Discretization;
use mppfv::limiters::zalesak_alphas;
use mppfv::mesh::{BoundaryKind, Slot, StructuredGrid};
use mppfv::problems::{self, ProblemSpec};
use mppfv::solvers::{assemble_pseudo_jacobian, frozen_state, JacobianMode, NewtonSolver};
use mppfv::tableau::iex_tableau;
use mppfv::time_integration::{dirk_step, iex_step};
use mppfv::weno::{weno5_face_with, Side, Stencil5, WenoParams};

pub type Check = Result<String, String>;

fn random_grid(rng: &mut ChaCha8Rng) -> StructuredGrid {
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(2..40);
        let bc = if rng.gen_bool(0.5) { BoundaryKind::Periodic } else { BoundaryKind::Dirichlet };
        StructuredGrid::new_1d(n, 0.0, rng.gen_range(0.5..3.0), bc).unwrap()
    } else {
        let nx = rng.gen_range(2..9);
        let ny = rng.gen_range(2..9);
        let bc = [BoundaryKind::Periodic, BoundaryKind::Dirichlet];
        StructuredGrid::new_2d(
            nx,
            ny,
            [0.0, 0.0],
            [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)],
            [bc[rng.gen_range(0..2)], bc[rng.gen_range(0..2)]],
        )
        .unwrap()
    }
}

/// Signed value spanning several magnitudes, zero with probability 1/10.
fn spread(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.1) {
        return 0.0;
    }
    let mag = 10f64.powf(rng.gen_range(-6.0..2.0));
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Limited correction sums against their budgets on random grids, with a
/// slack of 10 ulp of the largest term.
pub fn zalesak_fuzz(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let g = random_grid(&mut rng);
        let n = g.num_cells();
        let dg: Vec<f64> = (0..g.faces().len()).map(|_| spread(&mut rng)).collect();
        let qm: Vec<f64> = (0..n).map(|_| -spread(&mut rng).abs()).collect();
        let qp: Vec<f64> = (0..n).map(|_| spread(&mut rng).abs()).collect();
        let alpha = zalesak_alphas(&g, &dg, &qm, &qp).map_err(|e| e.to_string())?;
        if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(format!("alpha {a} outside [0, 1]"));
        }
        for i in 0..n {
            let mut sum = 0.0;
            let mut scale = 0.0;
            for &(fi, sign) in g.cell_faces(i) {
                let v = g.faces()[fi].area * sign * alpha[fi] * dg[fi];
                sum += v;
                scale += v.abs();
            }
            let slack = 10.0 * f64::EPSILON * scale.max(qp[i]).max(-qm[i]);
            let excess = (sum - qp[i]).max(qm[i] - sum);
            if excess > slack {
                return Err(format!("cell {i}: {} <= {sum} <= {} violated", qm[i], qp[i]));
            }
            if excess > 0.0 {
                worst = worst.max(excess / slack.max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok(format!("{instances} instances, worst excess {worst:.2} of the 10-ulp slack"))
}

/// r(y) = y - base + h div G^L(y) with λ^A frozen at `lambda`.
fn low_residual(d: &Discretization<'_>, y: &[f64], base: &[f64], h: f64, lambda: &[f64], t: f64) -> Vec<f64> {
    let ext = d.extend(y);
    let div = d.divergence(&d.low_order_flux(&ext, lambda, t));
    y.iter().zip(base).zip(&div).map(|((y, b), dv)| y - b + h * dv).collect()
}

fn smooth_state(p: &ProblemSpec, g: &StructuredGrid) -> Vec<f64> {
    let (lo, hi) = (p.u_min, if p.u_max.is_finite() { p.u_max } else { p.u_min + 1.0 });
    let (dlo, dhi) = g.domain();
    g.centers()
        .iter()
        .map(|x| {
            let s = (x[0] - dlo[0]) / (dhi[0] - dlo[0]);
            let r = (x[1] - dlo[1]) / (dhi[1] - dlo[1]).max(1e-300);
            let w = 0.5 + 0.35 * (2.0 * std::f64::consts::PI * s).sin() * (1.0 + 0.2 * (6.0 * r).cos());
            lo + (hi - lo) * w
        })
        .collect()
}

/// Pseudo-Jacobian against central differences of the low-order residual,
/// relative to the largest entry of each column.
pub fn pseudo_jacobian_vs_fd(tolerance: f64) -> Check {
    let cases: Vec<(ProblemSpec, usize)> = vec![
        (problems::linear_advdiff_1d(0.001).unwrap(), 16),
        (problems::burgers_1d(), 16),
        (problems::buckley_leverett_1d(), 16),
        (problems::steady_gaussian_1d(), 16),
        (problems::kpp_2d(0.01).unwrap(), 6),
        (problems::swirling_vortex_2d(1.5).unwrap(), 6),
        (problems::solid_rotation_2d(), 6),
    ];
    let mut worst = 0.0f64;
    for (p, n) in &cases {
        let g = StructuredGrid::for_problem(p, *n, *n).unwrap();
        let d = Discretization::new(&g, p).unwrap();
        let u = smooth_state(p, &g);
        let (h, t) = (0.05, 0.3);
        let lambda = d.wave_speeds(&d.extend(&u));
        let jac = assemble_pseudo_jacobian(&d, &u, h, t);
        let base = vec![0.0; u.len()];
        for j in 0..u.len() {
            let eps = 1e-6 * u[j].abs().max(1.0);
            let mut up = u.clone();
            let mut dn = u.clone();
            up[j] += eps;
            dn[j] -= eps;
            let rp = low_residual(&d, &up, &base, h, &lambda, t);
            let rm = low_residual(&d, &dn, &base, h, &lambda, t);
            let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
            let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (i, f) in fd.iter().enumerate() {
                let e = (jac.get(i, j) - f).abs() / scale;
                worst = worst.max(e);
                if e > tolerance {
                    return Err(format!("{} J[{i}][{j}] = {} vs {f} (rel {e:e})", p.name, jac.get(i, j)));
                }
            }
        }
    }
    Ok(format!("{} problems, worst relative error {worst:.2e}", cases.len()))
}

/// Exact average of Σ c_k x^k over [x - h/2, x + h/2].
fn poly_average(c: &[f64], x: f64, h: f64) -> f64 {
    let anti = |y: f64| c.iter().enumerate().map(|(k, ck)| ck * y.powi(k as i32 + 1) / (k + 1) as f64).sum::<f64>();
    (anti(x + 0.5 * h) - anti(x - 0.5 * h)) / h
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().map(|(k, ck)| ck * x.powi(k as i32)).sum()
}

fn poly_slope(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck * x.powi(k as i32 - 1)).sum()
}

/// Face values and slopes of random polynomials of degree ≤ `max_degree`
/// from their exact cell averages, to 1e-12 of the coefficient scale.
pub fn weno_reproduction(max_degree: usize, params: &WenoParams, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for degree in 0..=max_degree {
        for _ in 0..2_000 {
            let c: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = rng.gen_range(0.05..1.0);
            let x0 = rng.gen_range(-1.0..1.0);
            let v: [f64; 5] = std::array::from_fn(|k| poly_average(&c, x0 + (k as f64 - 2.0) * h, h));
            let s = Stencil5::new(v, h);
            let scale = 1.0 + c.iter().map(|x| x.abs()).sum::<f64>() * (x0.abs() + 3.0 * h).powi(degree as i32);
            for (side, xf) in [(Side::Left, x0 - 0.5 * h), (Side::Right, x0 + 0.5 * h)] {
                let (val, der) = weno5_face_with(&s, side, params);
                let ve = (val - poly(&c, xf)).abs() / scale;
                let de = (der - poly_slope(&c, xf)).abs() * h / scale;
                worst = worst.max(ve).max(de);
                if ve > 1e-12 {
                    return Err(format!("degree {degree} value {val} vs {}", poly(&c, xf)));
                }
                if de > 1e-12 {
                    return Err(format!("degree {degree} slope {der} vs {}", poly_slope(&c, xf)));
                }
            }
        }
    }
    Ok(format!("degrees 0..={max_degree}, worst scaled error {worst:.2e}"))
}

/// Bar states of random fields against the adjacent cell values.
pub fn bar_state_bounds(faces: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(ProblemSpec, usize)> = vec![
        (problems::linear_advdiff_1d(0.01).unwrap(), 50),
        (problems::burgers_1d(), 50),
        (problems::buckley_leverett_1d(), 50),
        (problems::solid_rotation_2d(), 12),
        (problems::swirling_vortex_2d(1.5).unwrap(), 12),
        (problems::kpp_2d(0.01).unwrap(), 12),
        (problems::linear_advdiff_2d(0.001).unwrap(), 12),
    ];
    let mut checked = 0;
    while checked < faces {
        for (p, n) in &cases {
            let g = StructuredGrid::for_problem(p, *n, *n).unwrap();
            let d = Discretization::new(&g, p).unwrap();
            let u: Vec<f64> = (0..g.num_cells()).map(|_| rng.gen_range(p.u_min..=p.u_max)).collect();
            let ext = d.extend(&u);
            let lambda = d.wave_speeds(&ext);
            let t = rng.gen_range(0.0..1.0);
            let bars = d.bar_states(&ext, &lambda, t);
            for (k, f) in g.faces().iter().enumerate() {
                let (Slot::Cell(lo), Slot::Cell(up)) = (f.lower, f.upper) else { continue };
                let (a, b) = (u[lo].min(u[up]), u[lo].max(u[up]));
                let tol = 1e-14 * (1.0 + b.abs());
                for (name, v) in
                    [("advective", bars.advective[k]), ("diffusive", bars.diffusive[k]), ("blended", bars.blended[k])]
                {
                    if v < a - tol || v > b + tol {
                        return Err(format!("{} face {k} {name} {v} outside [{a}, {b}]", p.name));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} interior faces"))
}

/// Largest difference between the extrapolation table and the RK form of
/// IEX4 on the linear problem. Its low-order scheme is affine in u, so both
/// paths solve identical linear systems exactly.
pub fn iex4_path_difference() -> f64 {
    let p = problems::linear_advdiff_1d(0.01).unwrap();
    let g = StructuredGrid::for_problem(&p, 40, 1).unwrap();
    let disc = Discretization::new(&g, &p).unwrap();
    let u0 = problems::initial_field(&p, &g).into_values();
    let dt = 0.4;
    let mut s1 = NewtonSolver::low_order(JacobianMode::Fresh, frozen_state(&u0));
    let mut s2 = NewtonSolver::low_order(JacobianMode::Fresh, frozen_state(&u0));
    let table = iex_step(&disc, &u0, 4, &mut s1, dt, 0.0).unwrap();
    let rk = dirk_step(&disc, &u0, &iex_tableau(4).unwrap(), &mut s2, dt, 0.0).unwrap();
    table.u.iter().zip(&rk.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
