use std::sync::Arc;

use num_complex::Complex64;

use super::fubini_study::FubiniStudy;
use super::point::{CMatrix, CVector, ChartPoint, TangentVec};
use crate::error::{GeometryError, Result};

/// First derivatives of the metric matrix: `dz[k] = ∂h/∂z_k`, `dzbar[k] = ∂h/∂z̄_k`.
#[derive(Clone, Debug)]
pub struct MetricDerivatives {
    pub dz: Vec<CMatrix>,
    pub dzbar: Vec<CMatrix>,
}

/// A complex manifold with a Hermitian metric, described through an atlas of
/// charts. `h` is linear in its first argument and conjugate-linear in its
/// second: `h(u, v) = Σ h_ij u_i conj(v_j)`.
pub trait KahlerModel: Send + Sync {
    fn name(&self) -> &str;

    /// Complex dimension.
    fn dim(&self) -> usize;

    fn chart_count(&self) -> usize {
        1
    }

    fn is_kahler_expected(&self) -> bool;

    /// Metric matrix `h_ij` at a point already validated by the caller.
    fn metric_at(&self, p: &ChartPoint) -> CMatrix;

    /// Closed-form first derivatives, when the model has them.
    fn analytic_derivatives(&self, _p: &ChartPoint) -> Option<MetricDerivatives> {
        None
    }

    /// Re-express a point in another chart.
    fn transition(&self, p: &ChartPoint, to: usize) -> Result<ChartPoint> {
        if p.chart == to {
            Ok(p.clone())
        } else {
            Err(GeometryError::Domain(format!("chart {to} does not exist")))
        }
    }

    /// Push a tangent vector through the transition map into chart `to`.
    fn push_tangent(&self, v: &TangentVec, to: usize) -> Result<TangentVec> {
        if v.base.chart == to {
            Ok(v.clone())
        } else {
            Err(GeometryError::Domain(format!("chart {to} does not exist")))
        }
    }

    /// Whether the point lies in the well-conditioned part of its chart.
    fn is_safe(&self, _p: &ChartPoint) -> bool {
        true
    }

    /// Chart in which the point is best conditioned.
    fn preferred_chart(&self, p: &ChartPoint) -> usize {
        p.chart
    }

    /// Riemannian logarithm `log_p(q)` as components in the chart of `p`,
    /// for models where it is available in closed form.
    fn log_map(&self, _p: &ChartPoint, _q: &ChartPoint) -> Option<Result<CVector>> {
        None
    }

    /// Minimizing geodesic from `p` to `q` sampled at `times ⊂ [0, 1]`, when
    /// known in closed form.
    fn closed_form_geodesic(
        &self,
        _p: &ChartPoint,
        _q: &ChartPoint,
        _times: &[f64],
    ) -> Option<Result<Vec<ChartPoint>>> {
        None
    }

    /// Validity of a point for this model.
    fn validate(&self, p: &ChartPoint) -> Result<()> {
        if p.chart >= self.chart_count() {
            return Err(GeometryError::Domain(format!(
                "chart id {} out of range for `{}`",
                p.chart,
                self.name()
            )));
        }
        if p.dim() != self.dim() {
            return Err(GeometryError::Dimension {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        if !p.is_finite() {
            return Err(GeometryError::Domain("non-finite coordinate".into()));
        }
        Ok(())
    }
}

/// Validated metric matrix.
pub fn metric(m: &dyn KahlerModel, p: &ChartPoint) -> Result<CMatrix> {
    m.validate(p)?;
    let h = m.metric_at(p);
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(GeometryError::SingularMetric);
    }
    Ok(h)
}

/// Relative step of the central-difference fallback for metric derivatives.
pub const METRIC_FD_STEP: f64 = 1e-5;

/// `∂h/∂z_k` and `∂h/∂z̄_k`, analytic when the model provides them and by
/// central differences of `h` otherwise.
pub fn metric_derivatives(m: &dyn KahlerModel, p: &ChartPoint) -> Result<MetricDerivatives> {
    m.validate(p)?;
    if let Some(d) = m.analytic_derivatives(p) {
        return Ok(d);
    }
    Ok(fd_metric_derivatives(m, p))
}

pub(crate) fn fd_metric_derivatives(m: &dyn KahlerModel, p: &ChartPoint) -> MetricDerivatives {
    let n = p.dim();
    let mut dz = Vec::with_capacity(n);
    let mut dzbar = Vec::with_capacity(n);
    let i = Complex64::i();
    for k in 0..n {
        let step = METRIC_FD_STEP * (1.0 + p.coords[k].norm());
        let shifted = |delta: Complex64| {
            let mut q = p.clone();
            q.coords[k] += delta;
            m.metric_at(&q)
        };
        let dx = (shifted(Complex64::new(step, 0.0)) - shifted(Complex64::new(-step, 0.0)))
            / Complex64::new(2.0 * step, 0.0);
        let dy = (shifted(Complex64::new(0.0, step)) - shifted(Complex64::new(0.0, -step)))
            / Complex64::new(2.0 * step, 0.0);
        dz.push((&dx - &dy * i) * Complex64::new(0.5, 0.0));
        dzbar.push((&dx + &dy * i) * Complex64::new(0.5, 0.0));
    }
    MetricDerivatives { dz, dzbar }
}

/// Keep the point in its chart while it is safe, else move it to the
/// preferred chart.
pub fn settle_chart(m: &dyn KahlerModel, p: ChartPoint) -> Result<ChartPoint> {
    if m.is_safe(&p) {
        return Ok(p);
    }
    let to = m.preferred_chart(&p);
    m.transition(&p, to)
}

/// Flat `ℂⁿ` with the identity metric.
#[derive(Clone, Debug)]
pub struct FlatSpace {
    n: usize,
}

impl FlatSpace {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        Self { n }
    }
}

impl KahlerModel for FlatSpace {
    fn name(&self) -> &str {
        "flat-cn"
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn is_kahler_expected(&self) -> bool {
        true
    }

    fn metric_at(&self, _p: &ChartPoint) -> CMatrix {
        CMatrix::identity(self.n, self.n)
    }

    fn analytic_derivatives(&self, _p: &ChartPoint) -> Option<MetricDerivatives> {
        let zero = CMatrix::zeros(self.n, self.n);
        Some(MetricDerivatives {
            dz: vec![zero.clone(); self.n],
            dzbar: vec![zero; self.n],
        })
    }

    fn log_map(&self, p: &ChartPoint, q: &ChartPoint) -> Option<Result<CVector>> {
        Some(Ok(&q.coords - &p.coords))
    }

    fn closed_form_geodesic(
        &self,
        p: &ChartPoint,
        q: &ChartPoint,
        times: &[f64],
    ) -> Option<Result<Vec<ChartPoint>>> {
        let d = &q.coords - &p.coords;
        Some(Ok(times
            .iter()
            .map(|&t| ChartPoint::new(0, &p.coords + &d * Complex64::new(t, 0.0)))
            .collect()))
    }
}

/// Diagonal Hermitian metric on `ℂ²` with `h₁₁ = 1 + ε·Re(z₂)`, `h₂₂ = 1`.
/// Its form is not closed, so it exercises the exterior derivative off the
/// Kähler locus.
#[derive(Clone, Debug)]
pub struct PerturbedHermitian {
    eps: f64,
}

impl PerturbedHermitian {
    pub const DEFAULT_EPS: f64 = 0.1;

    pub fn new(eps: f64) -> Self {
        Self { eps }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl Default for PerturbedHermitian {
    fn default() -> Self {
        Self::new(Self::DEFAULT_EPS)
    }
}

impl KahlerModel for PerturbedHermitian {
    fn name(&self) -> &str {
        "perturbed-hermitian"
    }

    fn dim(&self) -> usize {
        2
    }

    fn is_kahler_expected(&self) -> bool {
        false
    }

    fn metric_at(&self, p: &ChartPoint) -> CMatrix {
        let mut h = CMatrix::identity(2, 2);
        h[(0, 0)] = Complex64::new(1.0 + self.eps * p.coords[1].re, 0.0);
        h
    }

    fn analytic_derivatives(&self, _p: &ChartPoint) -> Option<MetricDerivatives> {
        let zero = CMatrix::zeros(2, 2);
        let mut d2 = zero.clone();
        // ∂/∂z₂ Re(z₂) = ∂/∂z̄₂ Re(z₂) = 1/2
        d2[(0, 0)] = Complex64::new(0.5 * self.eps, 0.0);
        Some(MetricDerivatives {
            dz: vec![zero.clone(), d2.clone()],
            dzbar: vec![zero, d2],
        })
    }

    fn validate(&self, p: &ChartPoint) -> Result<()> {
        if p.chart != 0 {
            return Err(GeometryError::Domain("single-chart model".into()));
        }
        if p.dim() != 2 {
            return Err(GeometryError::Dimension {
                expected: 2,
                found: p.dim(),
            });
        }
        if !p.is_finite() {
            return Err(GeometryError::Domain("non-finite coordinate".into()));
        }
        if 1.0 + self.eps * p.coords[1].re <= 0.0 {
            return Err(GeometryError::SingularMetric);
        }
        Ok(())
    }
}

type MetricFn = dyn Fn(&CVector) -> CMatrix + Send + Sync;

/// Single-chart model backed by a user-supplied metric; derivatives come from
/// central differences.
#[derive(Clone)]
pub struct CallbackModel {
    name: String,
    n: usize,
    kahler: bool,
    metric: Arc<MetricFn>,
}

impl CallbackModel {
    pub fn new<F>(name: impl Into<String>, n: usize, kahler: bool, metric: F) -> Self
    where
        F: Fn(&CVector) -> CMatrix + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            n,
            kahler,
            metric: Arc::new(metric),
        }
    }
}

impl std::fmt::Debug for CallbackModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CallbackModel")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("kahler", &self.kahler)
            .finish()
    }
}

impl KahlerModel for CallbackModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn is_kahler_expected(&self) -> bool {
        self.kahler
    }

    fn metric_at(&self, p: &ChartPoint) -> CMatrix {
        (self.metric)(&p.coords)
    }
}

/// Built-in model names accepted by [`model_by_name`].
pub const MODEL_NAMES: [&str; 4] = [
    "flat-cn",
    "fubini-study-p1",
    "fubini-study-pn",
    "perturbed-hermitian",
];

/// Build a model from its name. `dim` is the complex dimension for `flat-cn`
/// and `N` for `fubini-study-pn`; it is ignored by the fixed-dimension models.
pub fn model_by_name(name: &str, dim: usize) -> Result<Arc<dyn KahlerModel>> {
    if dim == 0 {
        return Err(GeometryError::InvalidParameter(
            "dimension must be positive".into(),
        ));
    }
    Ok(match name {
        "flat-cn" | "flat" => Arc::new(FlatSpace::new(dim)),
        "fubini-study-p1" | "p1" => Arc::new(FubiniStudy::p1()),
        "fubini-study-pn" | "pn" => Arc::new(FubiniStudy::new(dim)),
        "perturbed-hermitian" | "perturbed" => Arc::new(PerturbedHermitian::default()),
        other => return Err(GeometryError::UnknownModel(other.to_string())),
    })
}
