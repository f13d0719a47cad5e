//! Discretized loops `g: S¹ → X`, tangent fields along them, and the
//! loop-space metric `H` and form `Ω` by periodic trapezoidal quadrature.

mod geometry;
mod grid;
pub mod io;

pub use geometry::{
    integrand_table, loop_form_omega, loop_metric_h, sobolev_norm, spectral_derivative,
    IntegrandRow,
};
pub use grid::{Loop, LoopGrid, LoopTangent, Measure};
