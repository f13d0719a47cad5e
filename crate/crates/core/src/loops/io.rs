//! JSON loop and tangent files, CSV export of per-node integrands.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::IntegrandRow;
use super::grid::{Loop, LoopGrid, LoopTangent, Measure};
use crate::error::{GeometryError, Result};
use crate::kahler::{complex_pairs, ChartPoint, TangentVec};

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// On-disk loop: `{model, M, chart_ids[], coords[][]}` with coordinates as
/// `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopRecord {
    pub model: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub chart_ids: Vec<usize>,
    pub coords: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: f64,
}

impl LoopRecord {
    pub fn from_loop(model: &str, g: &Loop) -> Self {
        Self {
            model: model.to_string(),
            m: g.len(),
            chart_ids: g.points.iter().map(|p| p.chart).collect(),
            coords: g
                .points
                .iter()
                .map(|p| complex_pairs::to_pairs(&p.coords))
                .collect(),
            offset: g.grid.offset(),
        }
    }

    pub fn to_loop(&self, measure: Measure) -> Result<Loop> {
        if self.chart_ids.len() != self.m || self.coords.len() != self.m {
            return Err(GeometryError::GridMismatch {
                left: self.m,
                right: self.coords.len(),
            });
        }
        let grid = LoopGrid::new(self.m)?
            .with_offset(self.offset)
            .with_measure(measure);
        let points = self
            .chart_ids
            .iter()
            .zip(&self.coords)
            .map(|(&c, z)| ChartPoint::new(c, complex_pairs::from_pairs(z)))
            .collect();
        Loop::new(grid, points)
    }
}

/// On-disk tangent field: the base loop record plus one vector per node.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TangentRecord {
    #[serde(flatten)]
    pub base: LoopRecord,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl TangentRecord {
    pub fn from_tangent(model: &str, g: &Loop, xi: &LoopTangent) -> Result<Self> {
        xi.check_aligned(g)?;
        Ok(Self {
            base: LoopRecord::from_loop(model, g),
            vectors: xi
                .vectors
                .iter()
                .map(|v| complex_pairs::to_pairs(&v.components))
                .collect(),
        })
    }

    pub fn to_tangent(&self, measure: Measure) -> Result<(Loop, LoopTangent)> {
        let g = self.base.to_loop(measure)?;
        if self.vectors.len() != g.len() {
            return Err(GeometryError::GridMismatch {
                left: g.len(),
                right: self.vectors.len(),
            });
        }
        let vectors = g
            .points
            .iter()
            .zip(&self.vectors)
            .map(|(p, v)| TangentVec::new(p.clone(), complex_pairs::from_pairs(v)))
            .collect();
        let xi = LoopTangent::new(g.grid, vectors)?;
        Ok((g, xi))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let reader = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(reader)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(writer, value)?;
    Ok(())
}

pub fn write_integrand_csv(path: &Path, rows: &[IntegrandRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn loop_file_round_trip() {
        let grid = LoopGrid::new(6).unwrap().with_offset(0.125);
        let g = Loop::from_fn(grid, |j, s| {
            Ok(ChartPoint::from_slice(
                j % 2,
                &[Complex64::new(s.cos(), 1.0 / 3.0)],
            ))
        })
        .unwrap();
        let rec = LoopRecord::from_loop("fubini-study-p1", &g);
        let text = serde_json::to_string(&rec).unwrap();
        assert!(text.contains("\"M\":6"));
        let back: LoopRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_loop(Measure::Normalized).unwrap(), g);
    }

    #[test]
    fn malformed_record_is_rejected() {
        let rec = LoopRecord {
            model: "flat-cn".into(),
            m: 4,
            chart_ids: vec![0; 3],
            coords: vec![vec![[0.0, 0.0]]; 3],
            offset: 0.0,
        };
        assert!(rec.to_loop(Measure::Normalized).is_err());
    }
}
