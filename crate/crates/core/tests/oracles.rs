//! Independent checks of the limiter, the pseudo-Jacobian, the WENO
//! reconstruction and the bar states.

mod common;

use common::checks;
use mppfv::limiters::zalesak_alphas;
use mppfv::mesh::{BoundaryKind, StructuredGrid};
use mppfv::weno::WenoParams;

#[test]
fn zalesak_sums_stay_within_budgets() {
    checks::zalesak_fuzz(10_000, 7).unwrap();
}

#[test]
fn zalesak_hand_example() {
    // Three periodic cells, corrections 4, -2, 1 on the faces 0|1, 1|2, 2|0.
    let g = StructuredGrid::new_1d(3, 0.0, 3.0, BoundaryKind::Periodic).unwrap();
    let mut dg = vec![0.0; 3];
    for (k, f) in g.faces().iter().enumerate() {
        let (lo, up) = (f.lower.cell().unwrap(), f.upper.cell().unwrap());
        let v = match (lo, up) {
            (0, 1) => 4.0,
            (1, 2) => -2.0,
            (2, 0) => 1.0,
            other => panic!("unexpected face {other:?}"),
        };
        // Owner-oriented correction leaving the owner.
        dg[k] = if f.owner == lo { v } else { -v };
    }
    let alpha = zalesak_alphas(&g, &dg, &[-1.0; 3], &[1.0; 3]).unwrap();
    for i in 0..3 {
        let s: f64 = g.cell_faces(i).iter().map(|&(fi, sign)| sign * alpha[fi] * dg[fi]).sum();
        assert!((-1.0 - 1e-15..=1.0 + 1e-15).contains(&s), "cell {i}: {s}");
    }
}

#[test]
fn pseudo_jacobian_matches_finite_differences() {
    checks::pseudo_jacobian_vs_fd(1e-6).unwrap();
}

#[test]
fn weno_reproduces_quartics_with_linear_weights() {
    checks::weno_reproduction(4, &WenoParams::linear(), 11).unwrap();
}

#[test]
fn weno_reproduces_quadratics_with_nonlinear_weights() {
    checks::weno_reproduction(2, &WenoParams::default(), 29).unwrap();
}

#[test]
fn bar_states_lie_between_neighbors() {
    checks::bar_state_bounds(10_000, 3).unwrap();
}
