//! Perturbations of loops and finite-difference derivatives along them.

use num_complex::Complex64;

use super::fields::LoopVectorField;
use crate::error::{GeometryError, Result};
use crate::kahler::{settle_chart, CVector, ChartPoint, KahlerModel, TangentVec};
use crate::loops::{Loop, LoopTangent};
use crate::numeric::{richardson_derivative, richardson_scalar};

/// A scalar function on loops, e.g. `g ↦ Ω_g(ξ_g, η_g)`.
pub trait ScalarLoopFunctional {
    fn eval(&self, g: &Loop) -> Result<Complex64>;
}

impl<F> ScalarLoopFunctional for F
where
    F: Fn(&Loop) -> Result<Complex64>,
{
    fn eval(&self, g: &Loop) -> Result<Complex64> {
        self(g)
    }
}

/// Base finite-difference step, `1e-4·(1 + max |z|)`.
pub fn fd_step(g: &Loop) -> f64 {
    1e-4 * (1.0 + g.max_modulus())
}

/// `g + tν` in chart coordinates, node by node; nodes that leave the safe
/// part of their chart are re-expressed in the preferred chart.
pub fn perturb_loop(m: &dyn KahlerModel, g: &Loop, nu: &LoopTangent, t: f64) -> Result<Loop> {
    nu.check_aligned(g)?;
    let tc = Complex64::new(t, 0.0);
    let points = g
        .points
        .iter()
        .zip(&nu.vectors)
        .map(|(p, v)| {
            let q = ChartPoint::new(p.chart, &p.coords + &v.components * tc);
            m.validate(&q)?;
            settle_chart(m, q)
        })
        .collect::<Result<_>>()?;
    Loop::new(g.grid, points)
}

/// `ν(F)(g) = d_gF[ν_g]` by Richardson-extrapolated central differences.
pub fn directional_derivative(
    m: &dyn KahlerModel,
    f: &dyn ScalarLoopFunctional,
    g: &Loop,
    nu: &LoopTangent,
) -> Result<Complex64> {
    nu.check_aligned(g)?;
    richardson_scalar(|t| f.eval(&perturb_loop(m, g, nu, t)?), fd_step(g))
}

fn unflatten(g: &Loop, data: &[Complex64]) -> Result<LoopTangent> {
    let n = g.points.first().map_or(0, ChartPoint::dim);
    let vectors = g
        .points
        .iter()
        .enumerate()
        .map(|(j, p)| {
            TangentVec::new(
                p.clone(),
                CVector::from_column_slice(&data[j * n..(j + 1) * n]),
            )
        })
        .collect();
    LoopTangent::new(g.grid, vectors)
}

/// Field value at a perturbed loop, expressed in the charts of the base loop.
fn field_in_base_charts(
    m: &dyn KahlerModel,
    field: &dyn LoopVectorField,
    g: &Loop,
    perturbed: &Loop,
) -> Result<Vec<Complex64>> {
    let xi = field.eval(m, perturbed)?;
    xi.check_aligned(perturbed)?;
    let mut out = Vec::new();
    for (v, base) in xi.vectors.iter().zip(&g.points) {
        let v = if v.base.chart == base.chart {
            v.clone()
        } else {
            m.push_tangent(v, base.chart)?
        };
        out.extend(v.components.iter().copied());
    }
    Ok(out)
}

/// Derivative of the chart components of a field along `nu`, by finite
/// differences.
pub fn field_derivative_fd(
    m: &dyn KahlerModel,
    field: &dyn LoopVectorField,
    g: &Loop,
    nu: &LoopTangent,
) -> Result<LoopTangent> {
    nu.check_aligned(g)?;
    let d = richardson_derivative(
        |t| field_in_base_charts(m, field, g, &perturb_loop(m, g, nu, t)?),
        fd_step(g),
    )?;
    unflatten(g, &d)
}

/// Derivative of a field along `nu`: the analytic one when the field has
/// it, finite differences otherwise.
pub fn field_derivative(
    m: &dyn KahlerModel,
    field: &dyn LoopVectorField,
    g: &Loop,
    nu: &LoopTangent,
) -> Result<LoopTangent> {
    match field.derivative(m, g, nu) {
        Some(Ok(d)) => Ok(d),
        Some(Err(GeometryError::MissingDerivative)) | None => field_derivative_fd(m, field, g, nu),
        Some(Err(e)) => Err(e),
    }
}

/// Lie bracket `[ξ, η](g) = D_ξ η − D_η ξ`.
pub fn lie_bracket(
    m: &dyn KahlerModel,
    xi: &dyn LoopVectorField,
    eta: &dyn LoopVectorField,
    g: &Loop,
) -> Result<LoopTangent> {
    let xi_g = xi.eval(m, g)?;
    let eta_g = eta.eval(m, g)?;
    let d_eta = field_derivative(m, eta, g, &xi_g)?;
    let d_xi = field_derivative(m, xi, g, &eta_g)?;
    d_eta.combine(1.0, &d_xi, -1.0)
}

/// Evaluation map `T_s(g) = g(s)` at a grid node.
pub fn evaluation_map(g: &Loop, s: f64) -> Result<ChartPoint> {
    Ok(g.points[g.grid.node_index(s)?].clone())
}

/// Differential of the evaluation map, `d_gT_s[ν] = ν(s)`.
pub fn evaluation_differential(nu: &LoopTangent, s: f64) -> Result<TangentVec> {
    Ok(nu.vectors[nu.grid.node_index(s)?].clone())
}

/// Mixed second difference of `T_s` along `(ξ, ν)` with step `t`, in the
/// chart of `g(s)`.
pub fn evaluation_second_difference(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &LoopTangent,
    nu: &LoopTangent,
    s: f64,
    t: f64,
) -> Result<CVector> {
    let j = g.grid.node_index(s)?;
    let chart = g.points[j].chart;
    let corner = |a: f64, b: f64| -> Result<CVector> {
        let shifted = xi.combine(a, nu, b)?;
        let q = perturb_loop(m, g, &shifted, 1.0)?;
        Ok(m.transition(&q.points[j], chart)?.coords)
    };
    if t <= 0.0 {
        return Err(GeometryError::InvalidParameter(
            "step must be positive".into(),
        ));
    }
    let d = corner(t, t)? - corner(t, -t)? - corner(-t, t)? + corner(-t, -t)?;
    Ok(d / Complex64::new(4.0 * t * t, 0.0))
}
