//! The exterior derivative of the loop-space form: the six-term invariant
//! formula, the integrated pointwise `dω`, and the chart-level derivative of
//! the integrand.

use num_complex::Complex64;

use super::derivative::{directional_derivative, lie_bracket, ScalarLoopFunctional};
use super::fields::LoopVectorField;
use crate::error::{GeometryError, Result};
use crate::kahler::{
    d_omega_eval, hermitian_form, metric, metric_derivatives, CVector, KahlerModel,
};
use crate::loops::{loop_form_omega, Loop, LoopTangent};
use crate::numeric::compensated_sum;

struct PairedOmega<'a> {
    m: &'a dyn KahlerModel,
    a: &'a dyn LoopVectorField,
    b: &'a dyn LoopVectorField,
}

impl ScalarLoopFunctional for PairedOmega<'_> {
    fn eval(&self, h: &Loop) -> Result<Complex64> {
        let (a, b) = (self.a.eval(self.m, h)?, self.b.eval(self.m, h)?);
        Ok(Complex64::new(loop_form_omega(self.m, h, &a, &b)?, 0.0))
    }
}

/// The six summands of `dΩ(ξ, η, ν)`, in order:
/// `ξΩ(η,ν)`, `ηΩ(ξ,ν)`, `νΩ(ξ,η)`, `Ω([ξ,η],ν)`, `Ω([η,ν],ξ)`, `Ω([ξ,ν],η)`.
pub fn six_term_parts(
    m: &dyn KahlerModel,
    xi: &dyn LoopVectorField,
    eta: &dyn LoopVectorField,
    nu: &dyn LoopVectorField,
    g: &Loop,
) -> Result<[f64; 6]> {
    let xi_g = xi.eval(m, g)?;
    let eta_g = eta.eval(m, g)?;
    let nu_g = nu.eval(m, g)?;

    let d1 = directional_derivative(m, &PairedOmega { m, a: eta, b: nu }, g, &xi_g)?.re;
    let d2 = directional_derivative(m, &PairedOmega { m, a: xi, b: nu }, g, &eta_g)?.re;
    let d3 = directional_derivative(m, &PairedOmega { m, a: xi, b: eta }, g, &nu_g)?.re;

    let b_xi_eta = lie_bracket(m, xi, eta, g)?;
    let b_eta_nu = lie_bracket(m, eta, nu, g)?;
    let b_xi_nu = lie_bracket(m, xi, nu, g)?;
    let o1 = loop_form_omega(m, g, &b_xi_eta, &nu_g)?;
    let o2 = loop_form_omega(m, g, &b_eta_nu, &xi_g)?;
    let o3 = loop_form_omega(m, g, &b_xi_nu, &eta_g)?;
    Ok([d1, d2, d3, o1, o2, o3])
}

/// `dΩ(ξ,η,ν) = ξΩ(η,ν) − ηΩ(ξ,ν) + νΩ(ξ,η) − Ω([ξ,η],ν) − Ω([η,ν],ξ) + Ω([ξ,ν],η)`.
pub fn d_omega_six_term(
    m: &dyn KahlerModel,
    xi: &dyn LoopVectorField,
    eta: &dyn LoopVectorField,
    nu: &dyn LoopVectorField,
    g: &Loop,
) -> Result<f64> {
    let [d1, d2, d3, o1, o2, o3] = six_term_parts(m, xi, eta, nu, g)?;
    Ok(d1 - d2 + d3 - o1 - o2 + o3)
}

/// `∫ dω(ξ(s), η(s), ν(s)) ds` by quadrature over the nodes.
pub fn integral_of_domega(
    m: &dyn KahlerModel,
    xi: &dyn LoopVectorField,
    eta: &dyn LoopVectorField,
    nu: &dyn LoopVectorField,
    g: &Loop,
) -> Result<f64> {
    let (a, b, c) = (xi.eval(m, g)?, eta.eval(m, g)?, nu.eval(m, g)?);
    integral_of_domega_values(m, g, &a, &b, &c)
}

/// Quadrature of `dω` on given tangent values.
pub fn integral_of_domega_values(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &LoopTangent,
    eta: &LoopTangent,
    nu: &LoopTangent,
) -> Result<f64> {
    xi.check_aligned(g)?;
    eta.check_aligned(g)?;
    nu.check_aligned(g)?;
    let w = g.grid.weight();
    let terms = (0..g.len())
        .map(|j| d_omega_eval(m, &xi.vectors[j], &eta.vectors[j], &nu.vectors[j]).map(|x| x * w))
        .collect::<Result<Vec<_>>>()?;
    Ok(compensated_sum(terms))
}

/// The three groups of the chart-level derivative of `ω_{g(s)}(ξ_g(s), η_g(s))`
/// along `ν`: `A` from the metric derivatives, `B` and `C` from the field
/// derivatives (second derivatives of the linear charts vanish).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrandTerms {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl IntegrandTerms {
    pub fn total(&self) -> Complex64 {
        self.a + self.b - self.c
    }
}

fn node_vector(t: &LoopTangent, j: usize) -> &CVector {
    &t.vectors[j].components
}

/// `A`, `B`, `C` at node `j`, using the analytic derivatives of both fields.
pub fn integrand_chart_terms(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &dyn LoopVectorField,
    eta: &dyn LoopVectorField,
    nu_g: &LoopTangent,
    j: usize,
) -> Result<IntegrandTerms> {
    nu_g.check_aligned(g)?;
    if j >= g.len() {
        return Err(GeometryError::InvalidParameter(format!(
            "node {j} out of range"
        )));
    }
    let xi_g = xi.eval(m, g)?;
    let eta_g = eta.eval(m, g)?;
    let dxi = xi
        .derivative(m, g, nu_g)
        .ok_or(GeometryError::MissingDerivative)??;
    let deta = eta
        .derivative(m, g, nu_g)
        .ok_or(GeometryError::MissingDerivative)??;

    let p = &g.points[j];
    let h = metric(m, p)?;
    let dh = metric_derivatives(m, p)?;
    let (x, y, v) = (
        node_vector(&xi_g, j),
        node_vector(&eta_g, j),
        node_vector(nu_g, j),
    );
    let (dx, dy) = (node_vector(&dxi, j), node_vector(&deta, j));
    let half_i = Complex64::new(0.0, 0.5);

    let mut a = Complex64::new(0.0, 0.0);
    for k in 0..v.len() {
        a += v[k] * (hermitian_form(&dh.dz[k], x, y) - hermitian_form(&dh.dz[k], y, x));
        a +=
            v[k].conj() * (hermitian_form(&dh.dzbar[k], x, y) - hermitian_form(&dh.dzbar[k], y, x));
    }
    let b = hermitian_form(&h, dx, y) + hermitian_form(&h, x, dy);
    let c = hermitian_form(&h, y, dx) + hermitian_form(&h, dy, x);
    Ok(IntegrandTerms {
        a: half_i * a,
        b: half_i * b,
        c: half_i * c,
    })
}

/// `d_g(ω_{g(s_j)}(ξ_g(s_j), η_g(s_j)))[ν] = A + B − C`.
pub fn integrand_chart_derivative(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &dyn LoopVectorField,
    eta: &dyn LoopVectorField,
    nu_g: &LoopTangent,
    j: usize,
) -> Result<Complex64> {
    Ok(integrand_chart_terms(m, g, xi, eta, nu_g, j)?.total())
}
