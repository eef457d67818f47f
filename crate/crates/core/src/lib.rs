//! Numerical laboratory for boundary feedback stabilization of 2×2 linear
//! hyperbolic systems discretized with the (viscous) upwind scheme.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: characteristic speeds, steady states and Riemann-invariant
//!   transforms for the wave, isothermal Euler and Saint-Venant systems.
//! - [`scheme`]: grid construction, artificial-viscosity coefficients, ghost
//!   cell closure from the feedback matrix, and the two explicit steppers.
//! - [`simulate`]: the time loop with stopping tolerance and diagnostics.
//! - [`lyapunov`]: the weighted discrete Lyapunov functional, decay rates
//!   and the feedback-matrix condition checks.
//! - [`harness`]: refinement studies, μ sweeps and table reproduction.
//! - [`config`]: flat `key = value` experiment configuration.

pub mod config;
pub mod error;
pub mod harness;
pub mod lyapunov;
pub mod model;
pub mod scheme;
pub mod simulate;

pub use error::{Error, Result};
