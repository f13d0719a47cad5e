use num_complex::Complex64;

use crate::calculus::{directional_derivative, field_derivative, lie_bracket, LoopVectorField};
use crate::error::{GeometryError, Result};
use crate::kahler::{christoffels, KahlerModel, TangentVec};
use crate::loops::{loop_metric_h, Loop, LoopTangent};

/// `(∇̃_ν ξ)_g(s_j) = Dξ[ν](s_j) + Γ(g(s_j))(ν(s_j), ξ(s_j))`.
pub fn covariant_derivative_loop(
    m: &dyn KahlerModel,
    g: &Loop,
    nu: &LoopTangent,
    xi: &dyn LoopVectorField,
) -> Result<LoopTangent> {
    if !m.is_kahler_expected() {
        return Err(GeometryError::NotKahler(m.name().to_string()));
    }
    nu.check_aligned(g)?;
    let xi_g = xi.eval(m, g)?;
    let d = field_derivative(m, xi, g, nu)?;
    let vectors = g
        .points
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let gamma = christoffels(m, p)?;
            let corr = gamma.contract(&nu.vectors[j].components, &xi_g.vectors[j].components);
            Ok(TangentVec::new(p.clone(), &d.vectors[j].components + corr))
        })
        .collect::<Result<_>>()?;
    LoopTangent::new(g.grid, vectors)
}

struct MetricPairing<'a> {
    m: &'a dyn KahlerModel,
    xi: &'a dyn LoopVectorField,
    eta: &'a dyn LoopVectorField,
}

impl crate::calculus::ScalarLoopFunctional for MetricPairing<'_> {
    fn eval(&self, g: &Loop) -> Result<Complex64> {
        let (a, b) = (self.xi.eval(self.m, g)?, self.eta.eval(self.m, g)?);
        loop_metric_h(self.m, g, &a, &b)
    }
}

/// `|ν(H(ξ, η)) − H(∇̃_ν ξ, η) − H(ξ, ∇̃_ν η)|`.
pub fn check_metric_compatibility(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &dyn LoopVectorField,
    eta: &dyn LoopVectorField,
    nu: &dyn LoopVectorField,
) -> Result<f64> {
    if !m.is_kahler_expected() {
        return Err(GeometryError::NotKahler(m.name().to_string()));
    }
    let nu_g = nu.eval(m, g)?;
    let lhs = directional_derivative(m, &MetricPairing { m, xi, eta }, g, &nu_g)?;
    let (xi_g, eta_g) = (xi.eval(m, g)?, eta.eval(m, g)?);
    let dxi = covariant_derivative_loop(m, g, &nu_g, xi)?;
    let deta = covariant_derivative_loop(m, g, &nu_g, eta)?;
    let rhs = loop_metric_h(m, g, &dxi, &eta_g)? + loop_metric_h(m, g, &xi_g, &deta)?;
    Ok((lhs - rhs).norm())
}

/// Node-wise max norm of `∇̃_ξ η − ∇̃_η ξ − [ξ, η]`.
pub fn check_torsion_free(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &dyn LoopVectorField,
    eta: &dyn LoopVectorField,
) -> Result<f64> {
    if !m.is_kahler_expected() {
        return Err(GeometryError::NotKahler(m.name().to_string()));
    }
    let (xi_g, eta_g) = (xi.eval(m, g)?, eta.eval(m, g)?);
    let a = covariant_derivative_loop(m, g, &xi_g, eta)?;
    let b = covariant_derivative_loop(m, g, &eta_g, xi)?;
    let bracket = lie_bracket(m, xi, eta, g)?;
    Ok(a.combine(1.0, &b, -1.0)?
        .combine(1.0, &bracket, -1.0)?
        .max_norm())
}
