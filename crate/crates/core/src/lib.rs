//! Modified Craig-Sneyd (MCS) ADI time stepping for two-dimensional
//! convection-diffusion equations with a mixed derivative term, together with
//! a von Neumann stability toolkit for the scheme.
//!
//! - [`stability`]: the scalar stability function `S_θ(z0, z1, z2)`, the cone
//!   condition on the scaled eigenvalues, and the auxiliary bounds.
//! - [`spectrum`]: Fourier symbols of the central finite-difference
//!   discretization on a periodic grid.
//! - [`solver`]: split operators, cyclic line solves, MCS and Douglas steps,
//!   temporal convergence studies.
//! - [`analysis`]: random and grid scans of `max |S_θ|` and the theorem checks.

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod solver;
pub mod spectrum;
pub mod stability;

pub use num_complex::Complex64;
