//! Numerical geometry of loop spaces `LX = W^{k,2}(S¹, X)` over Kähler
//! manifolds `X`, discretized on uniform periodic grids.
//!
//! - [`kahler`]: chart models of `X` (flat `ℂⁿ`, Fubini–Study `ℙᴺ`, a
//!   non-Kähler Hermitian test metric) with pointwise `h`, `ω`, `dω`,
//!   Christoffel symbols and geodesics.
//! - [`loops`]: loops, tangent fields along loops, the metric `H` and form `Ω`.
//! - [`calculus`]: vector fields on `LX`, directional derivatives, brackets
//!   and the exterior derivative `dΩ`.
//! - [`connection`]: the node-wise Levi-Civita connection, leaf geodesics and
//!   path length.
//! - [`experiments`]: reproducible sweeps and reports.

pub mod calculus;
pub mod connection;
pub mod error;
pub mod experiments;
pub mod kahler;
pub mod loops;
pub mod numeric;

pub use error::{GeometryError, Result};
