use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::kahler::{ChartPoint, KahlerModel, TangentVec};

/// Total mass of the quadrature measure on `S¹`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `ds/2π`, total mass 1.
    #[default]
    Normalized,
    /// `ds`, total mass `2π`.
    Raw,
}

impl Measure {
    pub fn total_mass(self) -> f64 {
        match self {
            Measure::Normalized => 1.0,
            Measure::Raw => 2.0 * PI,
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(Measure::Normalized),
            "raw" => Ok(Measure::Raw),
            other => Err(GeometryError::InvalidParameter(format!(
                "unknown measure `{other}`"
            ))),
        }
    }
}

/// Uniform periodic grid `s_j = 2πj/M + offset` with equal weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopGrid {
    m: usize,
    offset: f64,
    measure: Measure,
}

impl LoopGrid {
    pub const MIN_NODES: usize = 4;

    pub fn new(m: usize) -> Result<Self> {
        if m < Self::MIN_NODES {
            return Err(GeometryError::InvalidParameter(format!(
                "loop grid needs at least {} nodes, got {m}",
                Self::MIN_NODES
            )));
        }
        Ok(Self {
            m,
            offset: 0.0,
            measure: Measure::Normalized,
        })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.spacing() * j as f64 + self.offset
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(|j| self.node(j))
    }

    pub fn weight(&self) -> f64 {
        self.measure.total_mass() / self.m as f64
    }

    /// Index of the node at parameter `s` (modulo `2π`); off-grid values are
    /// rejected.
    pub fn node_index(&self, s: f64) -> Result<usize> {
        let x = (s - self.offset) / self.spacing();
        let j = x.round();
        if (x - j).abs() > 1e-9 {
            return Err(GeometryError::InvalidParameter(format!(
                "s = {s} is not a grid node"
            )));
        }
        Ok((j as i64).rem_euclid(self.m as i64) as usize)
    }

    pub(crate) fn check_same(&self, other: &LoopGrid) -> Result<()> {
        if self != other {
            return Err(GeometryError::GridMismatch {
                left: self.m,
                right: other.m,
            });
        }
        Ok(())
    }
}

/// A discretized loop `g ∈ LX`: one point per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    pub grid: LoopGrid,
    pub points: Vec<ChartPoint>,
}

impl Loop {
    pub fn new(grid: LoopGrid, points: Vec<ChartPoint>) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(GeometryError::GridMismatch {
                left: grid.len(),
                right: points.len(),
            });
        }
        Ok(Self { grid, points })
    }

    pub fn constant(grid: LoopGrid, p: ChartPoint) -> Self {
        Self {
            grid,
            points: vec![p; grid.len()],
        }
    }

    pub fn from_fn<F>(grid: LoopGrid, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> Result<ChartPoint>,
    {
        let points = (0..grid.len())
            .map(|j| f(j, grid.node(j)))
            .collect::<Result<_>>()?;
        Ok(Self { grid, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self, m: &dyn KahlerModel) -> Result<()> {
        self.points.iter().try_for_each(|p| m.validate(p))
    }

    /// Largest coordinate modulus over all nodes.
    pub fn max_modulus(&self) -> f64 {
        self.points
            .iter()
            .map(ChartPoint::max_modulus)
            .fold(0.0, f64::max)
    }
}

/// A tangent vector `ξ ∈ T_g(LX)`: one tangent vector per node of `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopTangent {
    pub grid: LoopGrid,
    pub vectors: Vec<TangentVec>,
}

impl LoopTangent {
    pub fn new(grid: LoopGrid, vectors: Vec<TangentVec>) -> Result<Self> {
        if vectors.len() != grid.len() {
            return Err(GeometryError::GridMismatch {
                left: grid.len(),
                right: vectors.len(),
            });
        }
        Ok(Self { grid, vectors })
    }

    pub fn zero(g: &Loop) -> Self {
        Self {
            grid: g.grid,
            vectors: g
                .points
                .iter()
                .map(|p| TangentVec::zero(p.clone()))
                .collect(),
        }
    }

    pub fn from_fn<F>(g: &Loop, f: F) -> Self
    where
        F: Fn(usize, f64, &ChartPoint) -> crate::kahler::CVector,
    {
        let vectors = g
            .points
            .iter()
            .enumerate()
            .map(|(j, p)| TangentVec::new(p.clone(), f(j, g.grid.node(j), p)))
            .collect();
        Self {
            grid: g.grid,
            vectors,
        }
    }

    /// Check node count and exact base alignment with `g`.
    pub fn check_aligned(&self, g: &Loop) -> Result<()> {
        self.grid.check_same(&g.grid)?;
        for (v, p) in self.vectors.iter().zip(&g.points) {
            v.check_dim()?;
            if v.base != *p {
                return Err(GeometryError::BaseMismatch);
            }
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let s = num_complex::Complex64::new(s, 0.0);
        Self {
            grid: self.grid,
            vectors: self.vectors.iter().map(|v| v.scaled(s)).collect(),
        }
    }

    /// Node-wise linear combination `a·self + b·other` (same bases required).
    pub fn combine(&self, a: f64, other: &LoopTangent, b: f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let (a, b) = (
            num_complex::Complex64::new(a, 0.0),
            num_complex::Complex64::new(b, 0.0),
        );
        let vectors = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .map(|(x, y)| {
                if x.base != y.base {
                    return Err(GeometryError::BaseMismatch);
                }
                Ok(TangentVec::new(
                    x.base.clone(),
                    &x.components * a + &y.components * b,
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: self.grid,
            vectors,
        })
    }

    /// Largest Euclidean norm of the chart components over the nodes.
    pub fn max_norm(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| v.components.norm())
            .fold(0.0, f64::max)
    }
}
