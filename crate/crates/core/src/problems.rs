//! Scalar convection-diffusion problems u_t + div f(u, x, t) = div(c(u, x) grad u).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryKind, CellField, StructuredGrid};

/// Boundary data along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    Dirichlet { lower: f64, upper: f64 },
}

impl Boundary {
    pub fn kind(&self) -> BoundaryKind {
        match self {
            Boundary::Periodic => BoundaryKind::Periodic,
            Boundary::Dirichlet { .. } => BoundaryKind::Dirichlet,
        }
    }
}

/// Floor applied to every wave-speed bound.
pub const MIN_WAVE_SPEED: f64 = 1e-12;

/// How λ^A is chosen on a face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveSpeed {
    Constant(f64),
    /// max of |u_i|, |u_j| and the two reconstructed face values.
    LocalMax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// f = a u, c = ε.
    LinearAdvDiff1d { epsilon: f64 },
    /// f = u²/2, c = ε.
    Burgers1d { epsilon: f64 },
    /// f = u²/(u² + (1-u)²), c = ε 4u(1-u) on [0, 1].
    BuckleyLeverett1d { epsilon: f64 },
    /// f = -ε x u / σ², c = ε.
    SteadyGaussian1d { epsilon: f64, sigma: f64 },
    /// f = v(x) u with v = 2π(0.5 - y, x - 0.5).
    SolidRotation2d,
    /// Time-reversing swirl with period `period`.
    SwirlingVortex2d { period: f64 },
    /// f = (u, u), c = ε.
    LinearAdvDiff2d { epsilon: f64 },
    /// f = (sin u, cos u), c = ε.
    Kpp2d { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub kind: ProblemKind,
    pub dim: usize,
    pub domain_lo: [f64; 2],
    pub domain_hi: [f64; 2],
    pub boundary: [Boundary; 2],
    pub u_min: f64,
    pub u_max: f64,
    pub final_time: f64,
    pub wave_speed: WaveSpeed,
}

/// Names accepted by [`by_name`].
pub const PROBLEM_NAMES: [&str; 8] = [
    "linear1d",
    "burgers1d",
    "buckley-leverett1d",
    "steady1d",
    "rotation2d",
    "vortex2d",
    "linear2d",
    "kpp2d",
];

/// Builtin problem by name; `epsilon` overrides the diffusion where the
/// problem has a free parameter.
pub fn by_name(name: &str, epsilon: Option<f64>) -> Result<ProblemSpec> {
    match name {
        "linear1d" => linear_advdiff_1d(epsilon.unwrap_or(0.0)),
        "burgers1d" => Ok(burgers_1d()),
        "buckley-leverett1d" => Ok(buckley_leverett_1d()),
        "steady1d" => Ok(steady_gaussian_1d()),
        "rotation2d" => Ok(solid_rotation_2d()),
        "vortex2d" => swirling_vortex_2d(1.5),
        "linear2d" => linear_advdiff_2d(epsilon.unwrap_or(0.001)),
        "kpp2d" => kpp_2d(epsilon.unwrap_or(0.0)),
        other => Err(Error::UnknownName { kind: "problem", name: other.to_string() }),
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon >= 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must be nonnegative, got {epsilon}")))
    }
}

pub fn linear_advdiff_1d(epsilon: f64) -> Result<ProblemSpec> {
    check_epsilon(epsilon)?;
    Ok(ProblemSpec {
        name: "linear1d",
        kind: ProblemKind::LinearAdvDiff1d { epsilon },
        dim: 1,
        domain_lo: [0.0, 0.0],
        domain_hi: [2.0 * PI, 1.0],
        boundary: [Boundary::Periodic; 2],
        u_min: 0.0,
        u_max: 1.0,
        final_time: 2.0 * PI,
        wave_speed: WaveSpeed::Constant(1.0),
    })
}

pub fn burgers_1d() -> ProblemSpec {
    ProblemSpec {
        name: "burgers1d",
        kind: ProblemKind::Burgers1d { epsilon: 0.01 },
        dim: 1,
        domain_lo: [-1.0, 0.0],
        domain_hi: [1.0, 1.0],
        boundary: [Boundary::Periodic; 2],
        u_min: 0.0,
        u_max: 2.0,
        final_time: 0.25,
        wave_speed: WaveSpeed::LocalMax,
    }
}

pub fn buckley_leverett_1d() -> ProblemSpec {
    ProblemSpec {
        name: "buckley-leverett1d",
        kind: ProblemKind::BuckleyLeverett1d { epsilon: 0.01 },
        dim: 1,
        domain_lo: [0.0, 0.0],
        domain_hi: [1.0, 1.0],
        boundary: [Boundary::Dirichlet { lower: 1.0, upper: 0.0 }, Boundary::Periodic],
        u_min: 0.0,
        u_max: 1.0,
        final_time: 0.2,
        wave_speed: WaveSpeed::Constant(2.0),
    }
}

pub fn steady_gaussian_1d() -> ProblemSpec {
    ProblemSpec {
        name: "steady1d",
        kind: ProblemKind::SteadyGaussian1d { epsilon: 0.01, sigma: 0.1 },
        dim: 1,
        domain_lo: [-1.0, 0.0],
        domain_hi: [1.0, 1.0],
        boundary: [Boundary::Dirichlet { lower: 0.0, upper: 0.0 }, Boundary::Periodic],
        u_min: 0.0,
        u_max: f64::INFINITY,
        final_time: 20.0,
        wave_speed: WaveSpeed::Constant(1.0),
    }
}

pub fn solid_rotation_2d() -> ProblemSpec {
    ProblemSpec {
        name: "rotation2d",
        kind: ProblemKind::SolidRotation2d,
        dim: 2,
        domain_lo: [0.0, 0.0],
        domain_hi: [1.0, 1.0],
        boundary: [Boundary::Periodic; 2],
        u_min: 0.0,
        u_max: 1.0,
        final_time: 1.0,
        wave_speed: WaveSpeed::Constant(PI),
    }
}

pub fn swirling_vortex_2d(period: f64) -> Result<ProblemSpec> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidArgument(format!("vortex period must be positive, got {period}")));
    }
    Ok(ProblemSpec {
        name: "vortex2d",
        kind: ProblemKind::SwirlingVortex2d { period },
        dim: 2,
        domain_lo: [0.0, 0.0],
        domain_hi: [1.0, 1.0],
        boundary: [Boundary::Periodic; 2],
        u_min: 0.0,
        u_max: 1.0,
        final_time: period,
        wave_speed: WaveSpeed::Constant(1.0),
    })
}

pub fn linear_advdiff_2d(epsilon: f64) -> Result<ProblemSpec> {
    check_epsilon(epsilon)?;
    Ok(ProblemSpec {
        name: "linear2d",
        kind: ProblemKind::LinearAdvDiff2d { epsilon },
        dim: 2,
        domain_lo: [0.0, 0.0],
        domain_hi: [2.0 * PI, 2.0 * PI],
        boundary: [Boundary::Periodic; 2],
        u_min: 0.0,
        u_max: 1.0,
        final_time: 0.5,
        wave_speed: WaveSpeed::Constant(1.0),
    })
}

pub fn kpp_2d(epsilon: f64) -> Result<ProblemSpec> {
    check_epsilon(epsilon)?;
    Ok(ProblemSpec {
        name: "kpp2d",
        kind: ProblemKind::Kpp2d { epsilon },
        dim: 2,
        domain_lo: [-2.0, -2.5],
        domain_hi: [2.0, 1.5],
        boundary: [Boundary::Periodic; 2],
        u_min: PI / 4.0,
        u_max: 14.0 * PI / 4.0,
        final_time: 1.0,
        wave_speed: WaveSpeed::Constant(1.0),
    })
}

fn three_body(x: [f64; 2]) -> f64 {
    let r = |cx: f64, cy: f64| ((x[0] - cx).powi(2) + (x[1] - cy).powi(2)).sqrt();
    let r_hump = r(0.25, 0.5);
    if r_hump <= 0.15 {
        return 0.25 + 0.25 * (PI * r_hump / 0.15).cos();
    }
    let r_cone = r(0.5, 0.25);
    if r_cone <= 0.15 {
        return 1.0 - r_cone / 0.15;
    }
    let in_slot = (x[0] - 0.5).abs() < 0.025 && x[1] < 0.85;
    if r(0.5, 0.75) <= 0.15 && !in_slot {
        return 1.0;
    }
    0.0
}

fn linear_exact(s: f64, t: f64, decay2: f64, decay4: f64) -> f64 {
    0.375 - 0.5 * (-decay2 * t).exp() * (2.0 * s).cos()
        + 0.125 * (-decay4 * t).exp() * (4.0 * s).cos()
}

impl ProblemSpec {
    /// Diffusion coefficient scale ε (zero for pure transport).
    pub fn epsilon(&self) -> f64 {
        match self.kind {
            ProblemKind::LinearAdvDiff1d { epsilon }
            | ProblemKind::Burgers1d { epsilon }
            | ProblemKind::BuckleyLeverett1d { epsilon }
            | ProblemKind::SteadyGaussian1d { epsilon, .. }
            | ProblemKind::LinearAdvDiff2d { epsilon }
            | ProblemKind::Kpp2d { epsilon } => epsilon,
            ProblemKind::SolidRotation2d | ProblemKind::SwirlingVortex2d { .. } => 0.0,
        }
    }

    /// Component `axis` of f(u, x, t).
    #[inline]
    pub fn flux(&self, u: f64, x: [f64; 2], t: f64, axis: usize) -> f64 {
        match self.kind {
            ProblemKind::Kpp2d { .. } => {
                if axis == 0 {
                    u.sin()
                } else {
                    u.cos()
                }
            }
            ProblemKind::Burgers1d { .. } => 0.5 * u * u,
            ProblemKind::BuckleyLeverett1d { .. } => {
                let w = 1.0 - u;
                u * u / (u * u + w * w)
            }
            _ => self.velocity(x, t, axis) * u,
        }
    }

    /// Component `axis` of ∂f/∂u.
    #[inline]
    pub fn flux_derivative(&self, u: f64, x: [f64; 2], t: f64, axis: usize) -> f64 {
        match self.kind {
            ProblemKind::Kpp2d { .. } => {
                if axis == 0 {
                    u.cos()
                } else {
                    -u.sin()
                }
            }
            ProblemKind::Burgers1d { .. } => u,
            ProblemKind::BuckleyLeverett1d { .. } => {
                let w = 1.0 - u;
                let d = u * u + w * w;
                2.0 * u * w / (d * d)
            }
            _ => self.velocity(x, t, axis),
        }
    }

    /// Velocity of the linear-flux problems; zero for the others.
    #[inline]
    fn velocity(&self, x: [f64; 2], t: f64, axis: usize) -> f64 {
        match self.kind {
            ProblemKind::LinearAdvDiff1d { .. } => {
                if axis == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            ProblemKind::LinearAdvDiff2d { .. } => 1.0,
            ProblemKind::SteadyGaussian1d { epsilon, sigma } => {
                if axis == 0 {
                    -epsilon * x[0] / (sigma * sigma)
                } else {
                    0.0
                }
            }
            ProblemKind::SolidRotation2d => {
                if axis == 0 {
                    2.0 * PI * (0.5 - x[1])
                } else {
                    2.0 * PI * (x[0] - 0.5)
                }
            }
            ProblemKind::SwirlingVortex2d { period } => {
                let s = (PI * t / period).cos();
                if axis == 0 {
                    (PI * x[0]).sin().powi(2) * (2.0 * PI * x[1]).sin() * s
                } else {
                    -(PI * x[1]).sin().powi(2) * (2.0 * PI * x[0]).sin() * s
                }
            }
            _ => 0.0,
        }
    }

    /// Diffusion coefficient c(u, x) ≥ 0.
    #[inline]
    pub fn diffusion(&self, u: f64, _x: [f64; 2]) -> f64 {
        match self.kind {
            ProblemKind::BuckleyLeverett1d { epsilon } => {
                if (0.0..=1.0).contains(&u) {
                    epsilon * 4.0 * u * (1.0 - u)
                } else {
                    0.0
                }
            }
            _ => self.epsilon(),
        }
    }

    /// ∂c/∂u.
    #[inline]
    pub fn diffusion_derivative(&self, u: f64, _x: [f64; 2]) -> f64 {
        match self.kind {
            ProblemKind::BuckleyLeverett1d { epsilon } => {
                if (0.0..=1.0).contains(&u) {
                    epsilon * 4.0 * (1.0 - 2.0 * u)
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    /// True when c does not depend on u.
    pub fn has_constant_diffusion(&self) -> bool {
        !matches!(self.kind, ProblemKind::BuckleyLeverett1d { .. })
    }

    /// True when f is linear in u and λ^A is constant, so the low-order
    /// operator is affine in the state.
    pub fn is_linear(&self) -> bool {
        matches!(
            self.kind,
            ProblemKind::LinearAdvDiff1d { .. }
                | ProblemKind::LinearAdvDiff2d { .. }
                | ProblemKind::SteadyGaussian1d { .. }
                | ProblemKind::SolidRotation2d
                | ProblemKind::SwirlingVortex2d { .. }
        )
    }

    /// True when f depends explicitly on t.
    pub fn is_time_dependent(&self) -> bool {
        matches!(self.kind, ProblemKind::SwirlingVortex2d { .. })
    }

    /// λ^A for a face with cell values (u_i, u_j) and reconstructed face
    /// values (û_i, û_j).
    #[inline]
    pub fn wave_speed_bound(&self, ui: f64, uj: f64, recon: (f64, f64)) -> f64 {
        match self.wave_speed {
            WaveSpeed::Constant(l) => l.max(MIN_WAVE_SPEED),
            WaveSpeed::LocalMax => ui
                .abs()
                .max(uj.abs())
                .max(recon.0.abs())
                .max(recon.1.abs())
                .max(MIN_WAVE_SPEED),
        }
    }

    /// True when λ^A depends on the reconstructed face values.
    pub fn wave_speed_needs_reconstruction(&self) -> bool {
        matches!(self.wave_speed, WaveSpeed::LocalMax)
    }

    pub fn initial_condition(&self, x: [f64; 2]) -> f64 {
        match self.kind {
            ProblemKind::LinearAdvDiff1d { .. } | ProblemKind::LinearAdvDiff2d { .. } => {
                self.exact_solution(x, 0.0).expect("linear problems have exact solutions")
            }
            ProblemKind::Burgers1d { .. } => {
                if x[0].abs() < 0.5 {
                    2.0
                } else {
                    0.0
                }
            }
            ProblemKind::BuckleyLeverett1d { .. } => {
                if x[0] < 1.0 / 3.0 {
                    1.0 - 3.0 * x[0]
                } else {
                    0.0
                }
            }
            ProblemKind::SteadyGaussian1d { sigma, .. } => {
                (2.0 * PI).sqrt() * sigma * (2.0 * PI * x[0]).sin().powi(2)
            }
            ProblemKind::SolidRotation2d | ProblemKind::SwirlingVortex2d { .. } => three_body(x),
            ProblemKind::Kpp2d { .. } => {
                if x[0] * x[0] + x[1] * x[1] <= 1.0 {
                    14.0 * PI / 4.0
                } else {
                    PI / 4.0
                }
            }
        }
    }

    /// Exact solution at (x, t) where one is known. For the steady problem
    /// this is the steady state, independent of t.
    pub fn exact_solution(&self, x: [f64; 2], t: f64) -> Option<f64> {
        match self.kind {
            ProblemKind::LinearAdvDiff1d { epsilon } => {
                Some(linear_exact(x[0] - t, t, 4.0 * epsilon, 16.0 * epsilon))
            }
            ProblemKind::LinearAdvDiff2d { epsilon } => {
                Some(linear_exact(x[0] + x[1] - 2.0 * t, t, 8.0 * epsilon, 32.0 * epsilon))
            }
            ProblemKind::SteadyGaussian1d { sigma, .. } => {
                Some((-x[0] * x[0] / (2.0 * sigma * sigma)).exp())
            }
            ProblemKind::SolidRotation2d => {
                let (s, c) = (-2.0 * PI * t).sin_cos();
                let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
                Some(three_body([0.5 + c * dx - s * dy, 0.5 + s * dx + c * dy]))
            }
            ProblemKind::SwirlingVortex2d { period } => {
                let phase = t / period;
                if (phase - phase.round()).abs() < 1e-12 {
                    Some(three_body(x))
                } else {
                    None
                }
            }
            ProblemKind::Burgers1d { .. }
            | ProblemKind::BuckleyLeverett1d { .. }
            | ProblemKind::Kpp2d { .. } => None,
        }
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact_solution([0.0, 0.0], self.final_time).is_some()
    }
}

/// Gauss-Legendre nodes and weights on [-1/2, 1/2] (weights sum to 1).
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.284_444_444_444_444_4),
    (-0.269_234_655_052_841_3, 0.239_314_335_249_683_2),
    (0.269_234_655_052_841_3, 0.239_314_335_249_683_2),
    (-0.453_089_922_969_332_2, 0.118_463_442_528_094_5),
    (0.453_089_922_969_332_2, 0.118_463_442_528_094_5),
];

/// Cell averages of `g` by tensor Gauss-Legendre quadrature.
pub fn cell_averages(grid: &StructuredGrid, g: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let [hx, hy] = grid.spacing();
    (0..grid.num_cells())
        .map(|c| {
            let [cx, cy] = grid.center_unchecked(c);
            if grid.dim() == 1 {
                GAUSS5.iter().map(|&(s, w)| w * g([cx + s * hx, 0.0])).sum()
            } else {
                let mut acc = 0.0;
                for &(sy, wy) in &GAUSS5 {
                    for &(sx, wx) in &GAUSS5 {
                        acc += wx * wy * g([cx + sx * hx, cy + sy * hy]);
                    }
                }
                acc
            }
        })
        .collect()
}

/// Initial cell averages on `grid`.
pub fn initial_field(problem: &ProblemSpec, grid: &StructuredGrid) -> CellField {
    let values = cell_averages(grid, |x| problem.initial_condition(x));
    CellField::new(grid, values).expect("builtin initial data is finite")
}

/// Exact solution sampled at cell centers.
pub fn evaluate_exact(problem: &ProblemSpec, grid: &StructuredGrid, t: f64) -> Result<CellField> {
    let mut values = Vec::with_capacity(grid.num_cells());
    for c in 0..grid.num_cells() {
        let x = grid.center_unchecked(c);
        match problem.exact_solution(x, t) {
            Some(v) => values.push(v),
            None => {
                return Err(Error::NoExactSolution(format!("{} at t = {t}", problem.name)));
            }
        }
    }
    CellField::new(grid, values)
}
