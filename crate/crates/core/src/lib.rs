//! Maximum-principle-preserving finite volume schemes for scalar
//! convection-diffusion equations on structured grids.
//!
//! Fluxes are WENO5 reconstructions blended with a Rusanov low-order flux;
//! time stepping uses diagonally implicit Runge-Kutta methods or implicit
//! Euler extrapolation, and bounds are enforced with FCT or the convex GMC
//! limiter.

pub mod error;
pub mod fluxes;
pub mod harness;
pub mod limiters;
pub mod mesh;
pub mod metrics;
pub mod par;
pub mod problems;
pub mod solvers;
pub mod tableau;
pub mod time_integration;
pub mod weno;

pub use error::{Error, Result};
