//! The node-wise connection on `LX`, its Levi-Civita checks, per-leaf
//! geodesics and paths of loops.

mod covariant;
mod geodesic;
mod path;

pub use covariant::{check_metric_compatibility, check_torsion_free, covariant_derivative_loop};
pub use geodesic::{assemble_loop_geodesic, leaf_geodesic, SHOOTING_MAX_ITER, SHOOTING_TOL};
pub use path::{
    geodesic_residual, leaf_residual, path_energy, path_length, path_velocities, residual_table,
    write_residual_csv, LoopPath, PathRecord, ResidualRow,
};
