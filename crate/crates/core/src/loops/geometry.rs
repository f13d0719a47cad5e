use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::grid::{Loop, LoopTangent};
use crate::error::{GeometryError, Result};
use crate::kahler::{christoffels, h_inner, omega_eval, CVector, KahlerModel, TangentVec};
use crate::numeric::{compensated_sum, compensated_sum_c};

fn check(g: &Loop, xi: &LoopTangent, eta: &LoopTangent) -> Result<()> {
    xi.check_aligned(g)?;
    eta.check_aligned(g)
}

/// Loop-space Hermitian product `H_g(ξ, η) = ∫ h_{g(s)}(ξ(s), η(s)) ds`.
pub fn loop_metric_h(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &LoopTangent,
    eta: &LoopTangent,
) -> Result<Complex64> {
    check(g, xi, eta)?;
    let w = Complex64::new(g.grid.weight(), 0.0);
    let terms = xi
        .vectors
        .iter()
        .zip(&eta.vectors)
        .map(|(a, b)| h_inner(m, a, b).map(|z| z * w))
        .collect::<Result<Vec<_>>>()?;
    Ok(compensated_sum_c(terms))
}

/// Loop-space form `Ω_g(ξ, η) = ∫ ω_{g(s)}(ξ(s), η(s)) ds`.
pub fn loop_form_omega(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &LoopTangent,
    eta: &LoopTangent,
) -> Result<f64> {
    check(g, xi, eta)?;
    let w = g.grid.weight();
    let terms = xi
        .vectors
        .iter()
        .zip(&eta.vectors)
        .map(|(a, b)| omega_eval(m, a, b).map(|x| x * w))
        .collect::<Result<Vec<_>>>()?;
    Ok(compensated_sum(terms))
}

/// Spectral derivative `d/ds` of periodic samples on a uniform grid.
pub fn spectral_derivative(values: &[Complex64]) -> Vec<Complex64> {
    let m = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf = values.to_vec();
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if 2 * k < m {
            k as f64
        } else if 2 * k == m {
            0.0
        } else {
            k as f64 - m as f64
        };
        *c *= Complex64::new(0.0, freq);
    }
    inv.process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.into_iter().map(|c| c * scale).collect()
}

/// Spectral `d/ds` applied to every component of a node-indexed vector list.
fn spectral_columns(cols: &[CVector]) -> Vec<CVector> {
    let n = cols.first().map_or(0, |c| c.len());
    let m = cols.len();
    let mut out = vec![CVector::zeros(n); m];
    for k in 0..n {
        let series: Vec<Complex64> = cols.iter().map(|c| c[k]).collect();
        for (j, d) in spectral_derivative(&series).into_iter().enumerate() {
            out[j][k] = d;
        }
    }
    out
}

/// Discrete `W^{k,2}` norm of `ξ` along `g` for `k ∈ {0, 1}`. The `k = 1`
/// term integrates `h(∇_s ξ, ∇_s ξ)` with `∇_s ξ = ∂_s ξ + Γ(∂_s g, ξ)`,
/// derivatives taken spectrally; all nodes must share one chart.
pub fn sobolev_norm(m: &dyn KahlerModel, g: &Loop, xi: &LoopTangent, k: u32) -> Result<f64> {
    let base = loop_metric_h(m, g, xi, xi)?.re;
    match k {
        0 => Ok(base.max(0.0).sqrt()),
        1 => {
            let chart = g.points[0].chart;
            if g.points.iter().any(|p| p.chart != chart) {
                return Err(GeometryError::Unsupported(
                    "Sobolev derivative needs the loop in a single chart".into(),
                ));
            }
            let coords: Vec<CVector> = g.points.iter().map(|p| p.coords.clone()).collect();
            let comps: Vec<CVector> = xi.vectors.iter().map(|v| v.components.clone()).collect();
            let dg = spectral_columns(&coords);
            let dxi = spectral_columns(&comps);
            let w = g.grid.weight();
            let mut terms = Vec::with_capacity(g.len());
            for j in 0..g.len() {
                let p = &g.points[j];
                let gamma = christoffels(m, p)?;
                let cov = &dxi[j] + gamma.contract(&dg[j], &comps[j]);
                let v = TangentVec::new(p.clone(), cov);
                terms.push(h_inner(m, &v, &v)?.re * w);
            }
            Ok((base + compensated_sum(terms)).max(0.0).sqrt())
        }
        other => Err(GeometryError::Unsupported(format!(
            "Sobolev index k = {other}"
        ))),
    }
}

/// Per-node integrand of `H` and `Ω`, for export.
#[derive(Clone, Debug, Serialize)]
pub struct IntegrandRow {
    pub node: usize,
    pub s: f64,
    pub h_re: f64,
    pub h_im: f64,
    pub omega: f64,
}

pub fn integrand_table(
    m: &dyn KahlerModel,
    g: &Loop,
    xi: &LoopTangent,
    eta: &LoopTangent,
) -> Result<Vec<IntegrandRow>> {
    check(g, xi, eta)?;
    xi.vectors
        .iter()
        .zip(&eta.vectors)
        .enumerate()
        .map(|(j, (a, b))| {
            let h = h_inner(m, a, b)?;
            Ok(IntegrandRow {
                node: j,
                s: g.grid.node(j),
                h_re: h.re,
                h_im: h.im,
                omega: -h.im,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::{ChartPoint, FlatSpace, FubiniStudy};
    use crate::loops::LoopGrid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flat_setup(m: usize) -> (FlatSpace, Loop) {
        let grid = LoopGrid::new(m).unwrap();
        (
            FlatSpace::new(1),
            Loop::constant(grid, ChartPoint::origin(0, 1)),
        )
    }

    #[test]
    fn constant_field_on_constant_loop() {
        let (model, g) = flat_setup(16);
        let xi = LoopTangent::from_fn(&g, |_, _, _| CVector::from_vec(vec![c(1.0, 0.0)]));
        assert_eq!(loop_metric_h(&model, &g, &xi, &xi).unwrap(), c(1.0, 0.0));
        let eta = LoopTangent::from_fn(&g, |_, _, _| CVector::from_vec(vec![c(0.0, 1.0)]));
        assert_eq!(loop_form_omega(&model, &g, &xi, &eta).unwrap(), 1.0);
        assert_eq!(loop_form_omega(&model, &g, &xi, &xi).unwrap(), 0.0);
    }

    #[test]
    fn pure_harmonic_integrates_to_zero() {
        for m in [4, 5, 16, 64] {
            let (model, g) = flat_setup(m);
            let xi = LoopTangent::from_fn(&g, |_, s, _| CVector::from_vec(vec![c(0.0, s).exp()]));
            let eta = LoopTangent::from_fn(&g, |_, _, _| CVector::from_vec(vec![c(1.0, 0.0)]));
            assert!(loop_metric_h(&model, &g, &xi, &eta).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn p1_constant_loop_matches_pointwise_metric() {
        let model = FubiniStudy::p1();
        let grid = LoopGrid::new(8).unwrap();
        let g = Loop::constant(grid, ChartPoint::origin(0, 1));
        let xi = LoopTangent::from_fn(&g, |_, _, _| CVector::from_vec(vec![c(1.0, 0.0)]));
        let pointwise = h_inner(&model, &xi.vectors[0], &xi.vectors[0]).unwrap();
        assert_eq!(loop_metric_h(&model, &g, &xi, &xi).unwrap(), pointwise);
    }

    #[test]
    fn sobolev_norms_of_unit_harmonic() {
        let (model, g) = flat_setup(64);
        let xi = LoopTangent::from_fn(&g, |_, s, _| CVector::from_vec(vec![c(0.0, s).exp()]));
        assert!((sobolev_norm(&model, &g, &xi, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((sobolev_norm(&model, &g, &xi, 1).unwrap() - 2f64.sqrt()).abs() < 1e-13);
        let konst = LoopTangent::from_fn(&g, |_, _, _| CVector::from_vec(vec![c(0.3, 0.4)]));
        let k0 = sobolev_norm(&model, &g, &konst, 0).unwrap();
        assert!((sobolev_norm(&model, &g, &konst, 1).unwrap() - k0).abs() < 1e-15);
        assert!(matches!(
            sobolev_norm(&model, &g, &konst, 2),
            Err(GeometryError::Unsupported(_))
        ));
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let (model, g) = flat_setup(8);
        let (_, other) = flat_setup(16);
        let xi = LoopTangent::zero(&g);
        let eta = LoopTangent::zero(&other);
        assert!(matches!(
            loop_metric_h(&model, &g, &xi, &eta),
            Err(GeometryError::GridMismatch { .. })
        ));
    }
}
