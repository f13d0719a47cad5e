use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::kahler::{christoffels, metric, CVector, ChartPoint, KahlerModel};
use crate::loops::io::LoopRecord;
use crate::loops::{Loop, Measure};
use crate::numeric::compensated_sum;

/// A path of loops `t ↦ γ(t)` sampled at increasing times on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopPath {
    pub times: Vec<f64>,
    pub loops: Vec<Loop>,
}

impl LoopPath {
    pub fn new(times: Vec<f64>, loops: Vec<Loop>) -> Result<Self> {
        if times.len() < 2 || times.len() != loops.len() {
            return Err(GeometryError::InvalidParameter(format!(
                "path needs matching times and loops (P >= 1), got {} and {}",
                times.len(),
                loops.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::InvalidParameter(
                "times must increase".into(),
            ));
        }
        for l in &loops[1..] {
            loops[0].grid.check_same(&l.grid)?;
        }
        Ok(Self { times, loops })
    }

    /// Number of time steps `P`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn nodes(&self) -> usize {
        self.loops[0].len()
    }

    /// The curve `t ↦ γ(t)(s_j)`.
    pub fn leaf(&self, j: usize) -> Vec<ChartPoint> {
        self.loops.iter().map(|l| l.points[j].clone()).collect()
    }

    /// Replace leaf `j` by the given samples.
    pub fn set_leaf(&mut self, j: usize, leaf: Vec<ChartPoint>) -> Result<()> {
        if leaf.len() != self.times.len() {
            return Err(GeometryError::GridMismatch {
                left: self.times.len(),
                right: leaf.len(),
            });
        }
        for (l, p) in self.loops.iter_mut().zip(leaf) {
            l.points[j] = p;
        }
        Ok(())
    }
}

/// On-disk path: `{model, times[], loops[]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathRecord {
    pub model: String,
    pub times: Vec<f64>,
    pub loops: Vec<LoopRecord>,
}

impl PathRecord {
    pub fn from_path(model: &str, path: &LoopPath) -> Self {
        Self {
            model: model.to_string(),
            times: path.times.clone(),
            loops: path
                .loops
                .iter()
                .map(|l| LoopRecord::from_loop(model, l))
                .collect(),
        }
    }

    pub fn to_path(&self, measure: Measure) -> Result<LoopPath> {
        let loops = self
            .loops
            .iter()
            .map(|r| r.to_loop(measure))
            .collect::<Result<_>>()?;
        LoopPath::new(self.times.clone(), loops)
    }
}

/// `q` seen from `p`: the logarithm when available, else the chart
/// difference in the chart of `p`.
fn displacement(m: &dyn KahlerModel, p: &ChartPoint, q: &ChartPoint) -> Result<CVector> {
    if let Some(v) = m.log_map(p, q) {
        return v;
    }
    let q = m.transition(q, p.chart).map_err(|_| {
        GeometryError::Domain("path leaves the chart of a neighbouring sample".into())
    })?;
    Ok(q.coords - &p.coords)
}

fn h_norm(m: &dyn KahlerModel, p: &ChartPoint, v: &CVector) -> Result<f64> {
    let h = metric(m, p)?;
    Ok(crate::kahler::hermitian_form(&h, v, v).re.max(0.0).sqrt())
}

/// Covariant acceleration magnitudes of one curve at its interior samples.
pub fn leaf_residual(m: &dyn KahlerModel, leaf: &[ChartPoint], times: &[f64]) -> Result<Vec<f64>> {
    if leaf.len() != times.len() || times.len() < 3 {
        return Err(GeometryError::InvalidParameter(
            "residual needs P >= 2".into(),
        ));
    }
    let uses_log = m.log_map(&leaf[0], &leaf[0]).is_some();
    (1..leaf.len() - 1)
        .map(|i| {
            let p = &leaf[i];
            let (hm, hp) = (times[i] - times[i - 1], times[i + 1] - times[i]);
            let back = displacement(m, p, &leaf[i - 1])?;
            let fwd = displacement(m, p, &leaf[i + 1])?;
            let two = 2.0 / (hm + hp);
            let acc = (&fwd / Complex64::new(hp, 0.0) + &back / Complex64::new(hm, 0.0))
                * Complex64::new(two, 0.0);
            let acc = if uses_log {
                acc
            } else {
                let vel = (&fwd - &back) / Complex64::new(hm + hp, 0.0);
                acc + christoffels(m, p)?.contract(&vel, &vel)
            };
            h_norm(m, p, &acc)
        })
        .collect()
}

/// One row of the residual report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidualRow {
    pub node: usize,
    pub time: f64,
    pub residual: f64,
}

/// Residual at every node and interior time.
pub fn residual_table(m: &dyn KahlerModel, path: &LoopPath) -> Result<Vec<ResidualRow>> {
    if !m.is_kahler_expected() {
        return Err(GeometryError::NotKahler(m.name().to_string()));
    }
    let per_leaf = (0..path.nodes())
        .into_par_iter()
        .map(|j| leaf_residual(m, &path.leaf(j), &path.times))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_leaf
        .into_iter()
        .enumerate()
        .flat_map(|(node, r)| {
            r.into_iter()
                .enumerate()
                .map(move |(i, residual)| ResidualRow {
                    node,
                    time: path.times[i + 1],
                    residual,
                })
                .collect::<Vec<_>>()
        })
        .collect())
}

/// Max over nodes and interior times of `|∇_{γ̇_s} γ̇_s|`.
pub fn geodesic_residual(m: &dyn KahlerModel, path: &LoopPath) -> Result<f64> {
    Ok(residual_table(m, path)?
        .iter()
        .map(|r| r.residual)
        .fold(0.0, f64::max))
}

pub fn write_residual_csv(path: &Path, rows: &[ResidualRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Velocity of one leaf at every sample: centered in the interior,
/// second-order one-sided at the ends.
fn leaf_velocities(
    m: &dyn KahlerModel,
    leaf: &[ChartPoint],
    times: &[f64],
) -> Result<Vec<CVector>> {
    let n = leaf.len();
    if n == 2 {
        let h = Complex64::new(times[1] - times[0], 0.0);
        return Ok(vec![
            displacement(m, &leaf[0], &leaf[1])? / h,
            -displacement(m, &leaf[1], &leaf[0])? / h,
        ]);
    }
    let one_sided = |i: usize, a: usize, b: usize| -> Result<CVector> {
        let (ha, hb) = (times[a] - times[i], times[b] - times[i]);
        let da = displacement(m, &leaf[i], &leaf[a])?;
        let db = displacement(m, &leaf[i], &leaf[b])?;
        // Quadratic through (0, 0), (ha, da), (hb, db), differentiated at 0.
        let ca = hb / (ha * (hb - ha));
        let cb = -ha / (hb * (hb - ha));
        Ok(da * Complex64::new(ca, 0.0) + db * Complex64::new(cb, 0.0))
    };
    let mut out = Vec::with_capacity(n);
    out.push(one_sided(0, 1, 2)?);
    for i in 1..n - 1 {
        let (hm, hp) = (times[i] - times[i - 1], times[i + 1] - times[i]);
        let back = displacement(m, &leaf[i], &leaf[i - 1])?;
        let fwd = displacement(m, &leaf[i], &leaf[i + 1])?;
        // Three-point derivative on a possibly uneven stencil.
        let v = &fwd * Complex64::new(hm / (hp * (hm + hp)), 0.0)
            - &back * Complex64::new(hp / (hm * (hm + hp)), 0.0);
        out.push(v);
    }
    out.push(one_sided(n - 1, n - 2, n - 3)?);
    Ok(out)
}

/// `γ̇(t_i)` for every time, as one velocity per node.
pub fn path_velocities(m: &dyn KahlerModel, path: &LoopPath) -> Result<Vec<Vec<CVector>>> {
    let per_leaf = (0..path.nodes())
        .into_par_iter()
        .map(|j| leaf_velocities(m, &path.leaf(j), &path.times))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..path.times.len())
        .map(|i| per_leaf.iter().map(|v| v[i].clone()).collect())
        .collect())
}

fn speed_squared(m: &dyn KahlerModel, path: &LoopPath) -> Result<Vec<f64>> {
    let vel = path_velocities(m, path)?;
    path.loops
        .iter()
        .zip(&vel)
        .map(|(l, v)| {
            let w = l.grid.weight();
            let terms = l
                .points
                .iter()
                .zip(v)
                .map(|(p, x)| {
                    let h = metric(m, p)?;
                    Ok(crate::kahler::hermitian_form(&h, x, x).re * w)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(compensated_sum(terms).max(0.0))
        })
        .collect()
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    compensated_sum(
        times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])),
    )
}

/// `L(γ) = ∫₀¹ sqrt(H(γ̇, γ̇)) dt`.
pub fn path_length(m: &dyn KahlerModel, path: &LoopPath) -> Result<f64> {
    let s = speed_squared(m, path)?;
    let speed: Vec<f64> = s.iter().map(|x| x.sqrt()).collect();
    Ok(trapezoid(&path.times, &speed))
}

/// `E(γ) = ∫₀¹ H(γ̇, γ̇) dt`.
pub fn path_energy(m: &dyn KahlerModel, path: &LoopPath) -> Result<f64> {
    Ok(trapezoid(&path.times, &speed_squared(m, path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::assemble_loop_geodesic;
    use crate::kahler::{FlatSpace, FubiniStudy};
    use crate::loops::LoopGrid;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_path_has_zero_length_and_residual() {
        let m = FubiniStudy::p1();
        let grid = LoopGrid::new(8).unwrap();
        let f = Loop::from_fn(grid, |_, s| {
            Ok(ChartPoint::from_slice(0, &[c(s.cos(), 0.1)]))
        })
        .unwrap();
        let path = assemble_loop_geodesic(&m, &f, &f, 4).unwrap();
        assert_eq!(path_length(&m, &path).unwrap(), 0.0);
        assert_eq!(geodesic_residual(&m, &path).unwrap(), 0.0);
    }

    #[test]
    fn constant_loops_reduce_to_one_leaf() {
        let m = FubiniStudy::p1();
        let grid = LoopGrid::new(8).unwrap();
        let f = Loop::constant(grid, ChartPoint::from_slice(0, &[c(0.0, 0.0)]));
        let g = Loop::constant(grid, ChartPoint::from_slice(0, &[c(1.0, 0.0)]));
        let path = assemble_loop_geodesic(&m, &f, &g, 16).unwrap();
        assert!((path_length(&m, &path).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert!((path_energy(&m, &path).unwrap() - FRAC_PI_4 * FRAC_PI_4).abs() < 1e-12);
        assert!(geodesic_residual(&m, &path).unwrap() < 1e-10);
    }

    #[test]
    fn bent_flat_path_is_detected() {
        let m = FlatSpace::new(1);
        let grid = LoopGrid::new(4).unwrap();
        let f = Loop::constant(grid, ChartPoint::from_slice(0, &[c(0.0, 0.0)]));
        let g = Loop::constant(grid, ChartPoint::from_slice(0, &[c(1.0, 0.0)]));
        let mut path = assemble_loop_geodesic(&m, &f, &g, 8).unwrap();
        assert!(geodesic_residual(&m, &path).unwrap() < 1e-12);
        let bent = path
            .times
            .iter()
            .map(|&t| ChartPoint::from_slice(0, &[c(t, 0.3 * (std::f64::consts::PI * t).sin())]))
            .collect();
        path.set_leaf(2, bent).unwrap();
        let rows = residual_table(&m, &path).unwrap();
        assert!(rows
            .iter()
            .filter(|r| r.node != 2)
            .all(|r| r.residual < 1e-12));
        assert!(geodesic_residual(&m, &path).unwrap() > 1e-2);
    }

    #[test]
    fn path_record_round_trip() {
        let m = FubiniStudy::p1();
        let grid = LoopGrid::new(4).unwrap();
        let f = Loop::constant(grid, ChartPoint::from_slice(0, &[c(0.2, 0.0)]));
        let g = Loop::from_fn(grid, |_, s| {
            Ok(ChartPoint::from_slice(0, &[c(0.0, s.sin())]))
        })
        .unwrap();
        let path = assemble_loop_geodesic(&m, &f, &g, 3).unwrap();
        let rec = PathRecord::from_path("p1", &path);
        let text = serde_json::to_string(&rec).unwrap();
        let back: PathRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_path(Measure::Normalized).unwrap(), path);
    }
}
