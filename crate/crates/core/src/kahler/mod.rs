//! Finite-dimensional Hermitian and Kähler models in chart coordinates.

mod fubini_study;
mod model;
mod ops;
mod point;

pub use fubini_study::{
    chart_path_length, fs_distance, fs_distance_homogeneous, gram_schmidt_reduce,
    pl2_norm_bound_check, FubiniStudy, GramSchmidtReduction, ORTHOGONAL_TOL, SAFE_RADIUS,
};
pub use model::{
    metric, metric_derivatives, model_by_name, settle_chart, CallbackModel, FlatSpace, KahlerModel,
    MetricDerivatives, PerturbedHermitian, METRIC_FD_STEP, MODEL_NAMES,
};
pub use ops::{
    christoffels, d_omega_eval, h_inner, hermitian_defect, hermitian_form, integrate_geodesic,
    is_positive_definite, omega_eval, Christoffels, GeodesicSample,
};
pub use point::{complex_pairs, CMatrix, CVector, ChartPoint, PointRecord, TangentVec};
