use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::path::LoopPath;
use crate::error::{GeometryError, Result};
use crate::kahler::{integrate_geodesic, CVector, ChartPoint, KahlerModel, TangentVec};
use crate::loops::Loop;

pub const SHOOTING_MAX_ITER: usize = 50;
pub const SHOOTING_TOL: f64 = 1e-10;

fn uniform_times(steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| i as f64 / steps as f64).collect()
}

fn shoot(
    m: &dyn KahlerModel,
    p: &ChartPoint,
    v: &CVector,
    steps: usize,
) -> Result<Vec<ChartPoint>> {
    let samples = integrate_geodesic(m, p, &TangentVec::new(p.clone(), v.clone()), 1.0, steps)?;
    Ok(samples.into_iter().map(|s| s.point).collect())
}

fn endpoint_miss(
    m: &dyn KahlerModel,
    p: &ChartPoint,
    q: &ChartPoint,
    v: &CVector,
    steps: usize,
) -> Result<DVector<f64>> {
    let end = shoot(m, p, v, steps)?.pop().expect("at least one sample");
    let end = m.transition(&end, q.chart)?;
    let d = end.coords - &q.coords;
    Ok(DVector::from_iterator(
        2 * d.len(),
        d.iter().flat_map(|z| [z.re, z.im]),
    ))
}

fn to_complex(x: &DVector<f64>) -> CVector {
    CVector::from_iterator(
        x.len() / 2,
        x.as_slice().chunks(2).map(|c| Complex64::new(c[0], c[1])),
    )
}

/// Newton iteration on the initial velocity with a finite-difference
/// Jacobian of the endpoint map.
fn shooting(
    m: &dyn KahlerModel,
    p: &ChartPoint,
    q: &ChartPoint,
    steps: usize,
) -> Result<Vec<ChartPoint>> {
    let q_local = m.transition(q, p.chart)?;
    let guess = &q_local.coords - &p.coords;
    let mut x = DVector::from_iterator(2 * guess.len(), guess.iter().flat_map(|z| [z.re, z.im]));
    let dim = x.len();
    let mut residual = f64::INFINITY;
    for _ in 0..SHOOTING_MAX_ITER {
        let f = endpoint_miss(m, p, q, &to_complex(&x), steps)?;
        residual = f.norm();
        if residual <= SHOOTING_TOL {
            return shoot(m, p, &to_complex(&x), steps);
        }
        let mut jac = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xp = x.clone();
            xp[k] += h;
            let mut xm = x.clone();
            xm[k] -= h;
            let col = (endpoint_miss(m, p, q, &to_complex(&xp), steps)?
                - endpoint_miss(m, p, q, &to_complex(&xm), steps)?)
                / (2.0 * h);
            jac.set_column(k, &col);
        }
        let step = jac
            .lu()
            .solve(&f)
            .ok_or(GeometryError::BvpFailed { node: 0, residual })?;
        x -= step;
    }
    Err(GeometryError::BvpFailed { node: 0, residual })
}

/// Constant-speed geodesic from `p` to `q` sampled at `steps + 1` uniform
/// times. Closed form where the model provides one, shooting otherwise.
pub fn leaf_geodesic(
    m: &dyn KahlerModel,
    p: &ChartPoint,
    q: &ChartPoint,
    steps: usize,
) -> Result<Vec<ChartPoint>> {
    if steps == 0 {
        return Err(GeometryError::InvalidParameter(
            "steps must be at least 1".into(),
        ));
    }
    if !m.is_kahler_expected() {
        return Err(GeometryError::NotKahler(m.name().to_string()));
    }
    m.validate(p)?;
    m.validate(q)?;
    if let Some(path) = m.closed_form_geodesic(p, q, &uniform_times(steps)) {
        return path;
    }
    shooting(m, p, q, steps)
}

/// Per-leaf geodesics `γ_s` from `f(s)` to `g(s)`, assembled into a path of
/// loops over `P` uniform time steps.
pub fn assemble_loop_geodesic(
    m: &dyn KahlerModel,
    f: &Loop,
    g: &Loop,
    p: usize,
) -> Result<LoopPath> {
    f.grid.check_same(&g.grid)?;
    let leaves: Vec<Result<Vec<ChartPoint>>> = f
        .points
        .par_iter()
        .zip(&g.points)
        .map(|(a, b)| leaf_geodesic(m, a, b, p))
        .collect();
    let antipodal: Vec<usize> = leaves
        .iter()
        .enumerate()
        .filter(|(_, r)| matches!(r, Err(GeometryError::Antipodal { .. })))
        .map(|(j, _)| j)
        .collect();
    if !antipodal.is_empty() {
        return Err(GeometryError::Antipodal { nodes: antipodal });
    }
    let leaves = leaves
        .into_iter()
        .enumerate()
        .map(|(j, r)| {
            r.map_err(|e| match e {
                GeometryError::BvpFailed { residual, .. } => {
                    GeometryError::BvpFailed { node: j, residual }
                }
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let loops = (0..=p)
        .map(|i| Loop::new(f.grid, leaves.iter().map(|leaf| leaf[i].clone()).collect()))
        .collect::<Result<_>>()?;
    LoopPath::new(uniform_times(p), loops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::{CMatrix, CallbackModel, FlatSpace, FubiniStudy};
    use crate::loops::LoopGrid;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn equal_endpoints_give_constant_path() {
        let m = FubiniStudy::p1();
        let p = ChartPoint::from_slice(0, &[c(0.3, -0.2)]);
        for q in leaf_geodesic(&m, &p, &p, 8).unwrap() {
            assert!((q.coords - &p.coords).norm() < 1e-15);
        }
    }

    #[test]
    fn flat_leaf_is_a_segment() {
        let m = FlatSpace::new(1);
        let p = ChartPoint::from_slice(0, &[c(0.0, 0.0)]);
        let q = ChartPoint::from_slice(0, &[c(1.0, 1.0)]);
        let path = leaf_geodesic(&m, &p, &q, 4).unwrap();
        assert!((path[2].coords[0] - c(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn p1_leaf_reaches_target_with_quarter_pi_length() {
        let m = FubiniStudy::p1();
        let p = ChartPoint::from_slice(0, &[c(0.0, 0.0)]);
        let q = ChartPoint::from_slice(0, &[c(1.0, 0.0)]);
        let path = leaf_geodesic(&m, &p, &q, 16).unwrap();
        let end = m.transition(path.last().unwrap(), 0).unwrap();
        assert!((end.coords[0] - c(1.0, 0.0)).norm() < 1e-14);
        let len: f64 = path
            .windows(2)
            .map(|w| m.distance(&w[0], &w[1]).unwrap())
            .sum();
        assert!((len - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn shooting_matches_closed_form() {
        // Same metric as the two-chart model, seen through a callback so no
        // closed form is available.
        let fs = FubiniStudy::p1();
        let cb = CallbackModel::new("fs-callback", 1, true, |z: &CVector| {
            let r = 1.0 + z.norm_squared();
            CMatrix::from_element(1, 1, c(1.0 / (r * r), 0.0))
        });
        let p = ChartPoint::from_slice(0, &[c(0.1, 0.2)]);
        let q = ChartPoint::from_slice(0, &[c(-0.4, 0.5)]);
        let a = leaf_geodesic(&fs, &p, &q, 200).unwrap();
        let b = leaf_geodesic(&cb, &p, &q, 200).unwrap();
        assert!((a[100].coords[0] - b[100].coords[0]).norm() < 1e-8);
    }

    #[test]
    fn antipodal_nodes_are_listed() {
        let m = FubiniStudy::p1();
        let grid = LoopGrid::new(4).unwrap();
        let f = Loop::constant(grid, ChartPoint::from_slice(0, &[c(0.0, 0.0)]));
        let g = Loop::from_fn(grid, |j, _| {
            Ok(if j % 2 == 1 {
                ChartPoint::from_slice(1, &[c(0.0, 0.0)])
            } else {
                ChartPoint::from_slice(0, &[c(0.5, 0.0)])
            })
        })
        .unwrap();
        match assemble_loop_geodesic(&m, &f, &g, 4) {
            Err(GeometryError::Antipodal { nodes }) => assert_eq!(nodes, vec![1, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
