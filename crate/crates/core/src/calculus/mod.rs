//! Vector fields on `LX`, directional derivatives, Lie brackets and the
//! exterior derivative `dΩ`.

mod derivative;
mod fields;
mod forms;

pub use derivative::{
    directional_derivative, evaluation_differential, evaluation_map, evaluation_second_difference,
    fd_step, field_derivative, field_derivative_fd, lie_bracket, perturb_loop,
    ScalarLoopFunctional,
};
pub use fields::{random_loop, FnField, LoopVectorField, PolynomialField};
pub use forms::{
    d_omega_six_term, integral_of_domega, integral_of_domega_values, integrand_chart_derivative,
    integrand_chart_terms, six_term_parts, IntegrandTerms,
};
