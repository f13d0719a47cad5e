use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// A point of the model given by its coordinates in one chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PointRecord", try_from = "PointRecord")]
pub struct ChartPoint {
    pub chart: usize,
    pub coords: CVector,
}

impl ChartPoint {
    pub fn new(chart: usize, coords: CVector) -> Self {
        Self { chart, coords }
    }

    pub fn from_slice(chart: usize, coords: &[Complex64]) -> Self {
        Self::new(chart, CVector::from_column_slice(coords))
    }

    pub fn origin(chart: usize, dim: usize) -> Self {
        Self::new(chart, CVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coords
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest coordinate modulus.
    pub fn max_modulus(&self) -> f64 {
        self.coords.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// A tangent vector given by its components on `∂/∂z_i` in the chart of `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVec {
    pub base: ChartPoint,
    #[serde(with = "complex_pairs")]
    pub components: CVector,
}

impl TangentVec {
    pub fn new(base: ChartPoint, components: CVector) -> Self {
        Self { base, components }
    }

    pub fn zero(base: ChartPoint) -> Self {
        let n = base.dim();
        Self::new(base, CVector::zeros(n))
    }

    pub fn from_slice(base: ChartPoint, components: &[Complex64]) -> Self {
        Self::new(base, CVector::from_column_slice(components))
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::new(self.base.clone(), &self.components * s)
    }

    pub(crate) fn check_dim(&self) -> Result<()> {
        if self.components.len() != self.base.dim() {
            return Err(GeometryError::Dimension {
                expected: self.base.dim(),
                found: self.components.len(),
            });
        }
        Ok(())
    }
}

/// Serialized form of a point: chart index plus `[re, im]` coordinate pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointRecord {
    pub chart_id: usize,
    pub coords: Vec<[f64; 2]>,
}

impl From<ChartPoint> for PointRecord {
    fn from(p: ChartPoint) -> Self {
        Self {
            chart_id: p.chart,
            coords: complex_pairs::to_pairs(&p.coords),
        }
    }
}

impl TryFrom<PointRecord> for ChartPoint {
    type Error = GeometryError;

    fn try_from(r: PointRecord) -> Result<Self> {
        let p = ChartPoint::new(r.chart_id, complex_pairs::from_pairs(&r.coords));
        if !p.is_finite() {
            return Err(GeometryError::Domain("non-finite coordinate".into()));
        }
        Ok(p)
    }
}

pub mod complex_pairs {
    //! Serde helpers for complex vectors stored as `[[re, im], ...]`.
    use super::CVector;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_pairs(v: &CVector) -> Vec<[f64; 2]> {
        v.iter().map(|z| [z.re, z.im]).collect()
    }

    pub fn from_pairs(p: &[[f64; 2]]) -> CVector {
        CVector::from_iterator(p.len(), p.iter().map(|[re, im]| Complex64::new(*re, *im)))
    }

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(from_pairs(&pairs))
    }
}
