//! Vector fields on the loop space: rules `g ↦ ξ_g ∈ T_g(LX)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{GeometryError, Result};
use crate::kahler::{CMatrix, CVector, ChartPoint, KahlerModel, TangentVec};
use crate::loops::{Loop, LoopGrid, LoopTangent};

/// A smooth rule assigning a tangent vector along every loop near a base
/// loop. Rules must be pure.
pub trait LoopVectorField: Send + Sync {
    fn eval(&self, m: &dyn KahlerModel, g: &Loop) -> Result<LoopTangent>;

    /// Analytic derivative of the chart components along `nu`, when known.
    fn derivative(
        &self,
        _m: &dyn KahlerModel,
        _g: &Loop,
        _nu: &LoopTangent,
    ) -> Option<Result<LoopTangent>> {
        None
    }
}

/// Field defined by an arbitrary closure; derivatives come from finite
/// differences only.
pub struct FnField<F>(pub F);

impl<F> LoopVectorField for FnField<F>
where
    F: Fn(&dyn KahlerModel, &Loop) -> Result<LoopTangent> + Send + Sync,
{
    fn eval(&self, m: &dyn KahlerModel, g: &Loop) -> Result<LoopTangent> {
        (self.0)(m, g)
    }
}

/// Node-wise polynomial field in the coordinates of a home chart:
///
/// `ξ_j(g) = A_j z + B_j z̄ + c_j + q_j ∘ z ∘ z`,  `z = g(s_j)`.
///
/// Covers constant-in-chart fields, coordinate-linear fields and
/// `e^{iks}`-modulated coordinate fields, each with an exact derivative.
#[derive(Clone, Debug)]
pub struct PolynomialField {
    chart: usize,
    linear: Vec<CMatrix>,
    antilinear: Vec<CMatrix>,
    constant: Vec<CVector>,
    quadratic: Vec<CVector>,
}

fn gaussian(rng: &mut impl Rng, scale: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * scale
}

/// Random smooth node profile `Σ_{|k|≤2} a_k e^{iks}`.
fn smooth_profile(rng: &mut impl Rng, grid: &LoopGrid, scale: f64) -> Vec<Complex64> {
    let coeffs: Vec<Complex64> = (0..5).map(|_| gaussian(rng, scale / 5f64.sqrt())).collect();
    grid.nodes()
        .map(|s| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| a * Complex64::new(0.0, (i as f64 - 2.0) * s).exp())
                .sum()
        })
        .collect()
}

/// Random smooth loop in chart 0: every coordinate is an independent
/// profile `Σ_{|k|≤2} a_k e^{iks}` with Gaussian coefficients.
pub fn random_loop(rng: &mut impl Rng, n: usize, grid: LoopGrid, scale: f64) -> Result<Loop> {
    let profiles: Vec<Vec<Complex64>> = (0..n).map(|_| smooth_profile(rng, &grid, scale)).collect();
    Loop::from_fn(grid, |j, _| {
        Ok(ChartPoint::new(
            0,
            CVector::from_fn(n, |a, _| profiles[a][j]),
        ))
    })
}

impl PolynomialField {
    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            chart: 0,
            linear: vec![CMatrix::zeros(n, n); m],
            antilinear: vec![CMatrix::zeros(n, n); m],
            constant: vec![CVector::zeros(n); m],
            quadratic: vec![CVector::zeros(n); m],
        }
    }

    /// Constant-in-chart field with the given per-node values.
    pub fn constant(values: Vec<CVector>) -> Self {
        let n = values.first().map_or(0, |v| v.len());
        let mut f = Self::zero(n, values.len());
        f.constant = values;
        f
    }

    /// Same value at every node.
    pub fn uniform(value: CVector, m: usize) -> Self {
        Self::constant(vec![value; m])
    }

    /// `ξ(g) = g`, the chart coordinates themselves.
    pub fn coordinate(n: usize, m: usize) -> Self {
        let mut f = Self::zero(n, m);
        f.linear = vec![CMatrix::identity(n, n); m];
        f
    }

    /// `ξ_j(g) = e^{i k s_j} g(s_j)`.
    pub fn harmonic(n: usize, grid: &LoopGrid, k: i32) -> Self {
        let mut f = Self::zero(n, grid.len());
        f.linear = grid
            .nodes()
            .map(|s| CMatrix::identity(n, n) * Complex64::new(0.0, k as f64 * s).exp())
            .collect();
        f
    }

    /// Random smooth field with all four coefficient groups populated.
    pub fn random(rng: &mut impl Rng, n: usize, grid: &LoopGrid, scale: f64) -> Self {
        let m = grid.len();
        let mut f = Self::zero(n, m);
        let matrix_field = |rng: &mut _| {
            let entries: Vec<Vec<Complex64>> = (0..n * n)
                .map(|_| smooth_profile(rng, grid, scale))
                .collect();
            (0..m)
                .map(|j| CMatrix::from_fn(n, n, |a, b| entries[a * n + b][j]))
                .collect::<Vec<_>>()
        };
        f.linear = matrix_field(rng);
        f.antilinear = matrix_field(rng);
        let vector_field = |rng: &mut _| {
            let entries: Vec<Vec<Complex64>> =
                (0..n).map(|_| smooth_profile(rng, grid, scale)).collect();
            (0..m)
                .map(|j| CVector::from_fn(n, |a, _| entries[a][j]))
                .collect::<Vec<_>>()
        };
        f.constant = vector_field(rng);
        f.quadratic = vector_field(rng);
        f
    }

    pub fn with_chart(mut self, chart: usize) -> Self {
        self.chart = chart;
        self
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    fn value_at(&self, j: usize, z: &CVector) -> CVector {
        let zbar = z.map(|x| x.conj());
        let quad = self.quadratic[j].component_mul(&z.component_mul(z));
        &self.linear[j] * z + &self.antilinear[j] * zbar + &self.constant[j] + quad
    }

    fn check_len(&self, g: &Loop) -> Result<()> {
        if self.constant.len() != g.len() {
            return Err(GeometryError::GridMismatch {
                left: self.constant.len(),
                right: g.len(),
            });
        }
        Ok(())
    }
}

impl LoopVectorField for PolynomialField {
    fn eval(&self, m: &dyn KahlerModel, g: &Loop) -> Result<LoopTangent> {
        self.check_len(g)?;
        let vectors = g
            .points
            .iter()
            .enumerate()
            .map(|(j, p)| {
                if p.chart == self.chart {
                    return Ok(TangentVec::new(p.clone(), self.value_at(j, &p.coords)));
                }
                let home: ChartPoint = m.transition(p, self.chart)?;
                let v = TangentVec::new(home.clone(), self.value_at(j, &home.coords));
                let pushed = m.push_tangent(&v, p.chart)?;
                Ok(TangentVec::new(p.clone(), pushed.components))
            })
            .collect::<Result<_>>()?;
        LoopTangent::new(g.grid, vectors)
    }

    fn derivative(
        &self,
        _m: &dyn KahlerModel,
        g: &Loop,
        nu: &LoopTangent,
    ) -> Option<Result<LoopTangent>> {
        Some((|| {
            self.check_len(g)?;
            nu.check_aligned(g)?;
            if g.points.iter().any(|p| p.chart != self.chart) {
                return Err(GeometryError::MissingDerivative);
            }
            let two = Complex64::new(2.0, 0.0);
            let vectors = g
                .points
                .iter()
                .zip(&nu.vectors)
                .enumerate()
                .map(|(j, (p, v))| {
                    let z = &p.coords;
                    let dv = &v.components;
                    let d = &self.linear[j] * dv
                        + &self.antilinear[j] * dv.map(|x| x.conj())
                        + self.quadratic[j].component_mul(&z.component_mul(dv)) * two;
                    TangentVec::new(p.clone(), d)
                })
                .collect();
            LoopTangent::new(g.grid, vectors)
        })())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::FubiniStudy;
    use rand::SeedableRng;

    #[test]
    fn field_is_chart_independent() {
        let m = FubiniStudy::p1();
        let grid = LoopGrid::new(4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = PolynomialField::random(&mut rng, 1, &grid, 0.5);
        let g0 = Loop::from_fn(grid, |_, s| {
            Ok(ChartPoint::from_slice(
                0,
                &[Complex64::new(1.0 + 0.2 * s.cos(), 0.3)],
            ))
        })
        .unwrap();
        let g1 = Loop::new(
            grid,
            g0.points
                .iter()
                .map(|p| m.transition(p, 1).unwrap())
                .collect(),
        )
        .unwrap();
        let x0 = f.eval(&m, &g0).unwrap();
        let x1 = f.eval(&m, &g1).unwrap();
        for (a, b) in x0.vectors.iter().zip(&x1.vectors) {
            let a1 = m.push_tangent(a, 1).unwrap();
            assert!((a1.components - &b.components).norm() < 1e-12);
        }
    }
}
