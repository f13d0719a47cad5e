//! Fubini–Study geometry on `ℙᴺ` in affine charts `z = w/w_c`, normalized so
//! that the distance between `[p]` and `[q]` is `arctan R` with
//! `R = ‖q − ⟨q,p⟩p‖ / |⟨q,p⟩|` on unit representatives (diameter `π/2`).

use std::f64::consts::FRAC_PI_2;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use super::model::{metric, KahlerModel, MetricDerivatives};
use super::point::{CMatrix, CVector, ChartPoint, TangentVec};
use crate::error::{GeometryError, Result};

/// Coordinates beyond this modulus leave the safe part of a chart.
pub const SAFE_RADIUS: f64 = 2.0;

/// `|⟨q,p⟩|` below this counts as orthogonal (antipodal on `ℙ¹`).
pub const ORTHOGONAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FubiniStudy {
    n: usize,
}

impl FubiniStudy {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "projective dimension must be positive");
        Self { n }
    }

    pub fn p1() -> Self {
        Self::new(1)
    }

    /// Homogeneous coordinates with `w_chart = 1`.
    pub fn to_homogeneous(&self, p: &ChartPoint) -> CVector {
        let mut w = CVector::zeros(self.n + 1);
        let mut k = 0;
        for (idx, slot) in w.iter_mut().enumerate() {
            if idx == p.chart {
                *slot = Complex64::new(1.0, 0.0);
            } else {
                *slot = p.coords[k];
                k += 1;
            }
        }
        w
    }

    pub fn from_homogeneous(&self, w: &CVector, chart: usize) -> Result<ChartPoint> {
        if w.len() != self.n + 1 {
            return Err(GeometryError::Dimension {
                expected: self.n + 1,
                found: w.len(),
            });
        }
        if chart > self.n {
            return Err(GeometryError::Domain(format!(
                "chart id {chart} out of range"
            )));
        }
        let pivot = w[chart];
        if pivot.norm() == 0.0 || w.norm() == 0.0 {
            return Err(GeometryError::Domain(format!(
                "point lies outside chart {chart}"
            )));
        }
        let coords = CVector::from_iterator(
            self.n,
            w.iter()
                .enumerate()
                .filter(|(i, _)| *i != chart)
                .map(|(_, z)| z / pivot),
        );
        let p = ChartPoint::new(chart, coords);
        if !p.is_finite() {
            return Err(GeometryError::Domain(format!(
                "point lies outside chart {chart}"
            )));
        }
        Ok(p)
    }

    /// Chart whose homogeneous pivot has the largest modulus.
    pub fn best_chart(w: &CVector) -> usize {
        let mut best = 0;
        for (i, z) in w.iter().enumerate() {
            if z.norm() > w[best].norm() {
                best = i;
            }
        }
        best
    }

    /// Point from homogeneous coordinates, placed in its best chart.
    pub fn point(&self, w: &[Complex64]) -> Result<ChartPoint> {
        let w = CVector::from_column_slice(w);
        if w.norm() == 0.0 {
            return Err(GeometryError::Domain("zero homogeneous vector".into()));
        }
        self.from_homogeneous(&w, Self::best_chart(&w))
    }

    /// Push a homogeneous velocity `dw` at `w` into chart coordinates of `chart`.
    fn chart_velocity(&self, w: &CVector, dw: &CVector, chart: usize) -> CVector {
        let pivot = w[chart];
        let dpivot = dw[chart];
        CVector::from_iterator(
            self.n,
            (0..=self.n)
                .filter(|i| *i != chart)
                .map(|i| (dw[i] * pivot - w[i] * dpivot) / (pivot * pivot)),
        )
    }

    /// Distance between two points given in any charts.
    pub fn distance(&self, p: &ChartPoint, q: &ChartPoint) -> Result<f64> {
        self.validate(p)?;
        self.validate(q)?;
        if p == q {
            return Ok(0.0);
        }
        fs_distance_homogeneous(&self.to_homogeneous(p), &self.to_homogeneous(q))
    }

    fn unit_pair(&self, p: &ChartPoint, q: &ChartPoint) -> Result<(CVector, CVector, f64)> {
        let wp = self.to_homogeneous(p);
        let wq = self.to_homogeneous(q);
        let up = &wp / Complex64::new(wp.norm(), 0.0);
        let uq = &wq / Complex64::new(wq.norm(), 0.0);
        // ⟨q,p⟩ = Σ q_k conj(p_k)
        let c = up.dotc(&uq);
        if c.norm() < ORTHOGONAL_TOL {
            return Err(GeometryError::Antipodal { nodes: vec![] });
        }
        let aligned = &uq * (c.conj() / c.norm());
        let theta = {
            let resid = (&aligned - &up * Complex64::new(c.norm(), 0.0)).norm();
            resid.atan2(c.norm())
        };
        Ok((up, aligned, theta))
    }
}

impl KahlerModel for FubiniStudy {
    fn name(&self) -> &str {
        if self.n == 1 {
            "fubini-study-p1"
        } else {
            "fubini-study-pn"
        }
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn chart_count(&self) -> usize {
        self.n + 1
    }

    fn is_kahler_expected(&self) -> bool {
        true
    }

    /// `h_ij = δ_ij/ρ − z̄_i z_j/ρ²`, `ρ = 1 + |z|²`, the complex Hessian of
    /// `ln ρ`.
    fn metric_at(&self, p: &ChartPoint) -> CMatrix {
        let z = &p.coords;
        let rho = 1.0 + z.norm_squared();
        CMatrix::from_fn(self.n, self.n, |i, j| {
            let delta = if i == j { 1.0 / rho } else { 0.0 };
            Complex64::new(delta, 0.0) - z[i].conj() * z[j] / (rho * rho)
        })
    }

    fn analytic_derivatives(&self, p: &ChartPoint) -> Option<MetricDerivatives> {
        let z = &p.coords;
        let n = self.n;
        let rho = 1.0 + z.norm_squared();
        let (r2, r3) = (rho * rho, rho * rho * rho);
        let kd = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let dz = (0..n)
            .map(|k| {
                CMatrix::from_fn(n, n, |i, j| {
                    -z[k].conj() * kd(i, j) / r2 - z[i].conj() * kd(j, k) / r2
                        + z[i].conj() * z[j] * z[k].conj() * 2.0 / r3
                })
            })
            .collect();
        let dzbar = (0..n)
            .map(|k| {
                CMatrix::from_fn(n, n, |i, j| {
                    -z[k] * kd(i, j) / r2 - z[j] * kd(i, k) / r2
                        + z[i].conj() * z[j] * z[k] * 2.0 / r3
                })
            })
            .collect();
        Some(MetricDerivatives { dz, dzbar })
    }

    fn transition(&self, p: &ChartPoint, to: usize) -> Result<ChartPoint> {
        self.validate(p)?;
        if p.chart == to {
            return Ok(p.clone());
        }
        self.from_homogeneous(&self.to_homogeneous(p), to)
    }

    fn push_tangent(&self, v: &TangentVec, to: usize) -> Result<TangentVec> {
        v.check_dim()?;
        if v.base.chart == to {
            return Ok(v.clone());
        }
        let base = self.transition(&v.base, to)?;
        let w = self.to_homogeneous(&v.base);
        let mut dw = CVector::zeros(self.n + 1);
        let mut k = 0;
        for idx in 0..=self.n {
            if idx != v.base.chart {
                dw[idx] = v.components[k];
                k += 1;
            }
        }
        Ok(TangentVec::new(base, self.chart_velocity(&w, &dw, to)))
    }

    fn is_safe(&self, p: &ChartPoint) -> bool {
        p.max_modulus() <= SAFE_RADIUS
    }

    fn preferred_chart(&self, p: &ChartPoint) -> usize {
        Self::best_chart(&self.to_homogeneous(p))
    }

    fn log_map(&self, p: &ChartPoint, q: &ChartPoint) -> Option<Result<CVector>> {
        Some((|| {
            self.validate(p)?;
            self.validate(q)?;
            if p == q {
                return Ok(CVector::zeros(self.n));
            }
            let (up, aligned, theta) = self.unit_pair(p, q)?;
            let c = up.dotc(&aligned);
            let perp = &aligned - &up * c;
            let pn = perp.norm();
            if pn == 0.0 {
                return Ok(CVector::zeros(self.n));
            }
            let dw = &perp * Complex64::new(theta / pn, 0.0);
            Ok(self.chart_velocity(&up, &dw, p.chart))
        })())
    }

    /// Great circle through the unit representatives, projected to `ℙᴺ`.
    fn closed_form_geodesic(
        &self,
        p: &ChartPoint,
        q: &ChartPoint,
        times: &[f64],
    ) -> Option<Result<Vec<ChartPoint>>> {
        Some((|| {
            self.validate(p)?;
            self.validate(q)?;
            if p == q {
                return Ok(vec![p.clone(); times.len()]);
            }
            let (up, aligned, theta) = self.unit_pair(p, q)?;
            let c = up.dotc(&aligned);
            let perp = &aligned - &up * c;
            let pn = perp.norm();
            let dir = if pn > 0.0 {
                &perp / Complex64::new(pn, 0.0)
            } else {
                perp
            };
            let mut chart = p.chart;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                let (s, co) = (t * theta).sin_cos();
                let w = &up * Complex64::new(co, 0.0) + &dir * Complex64::new(s, 0.0);
                let pt = match self.from_homogeneous(&w, chart) {
                    Ok(pt) if self.is_safe(&pt) => pt,
                    _ => {
                        chart = Self::best_chart(&w);
                        self.from_homogeneous(&w, chart)?
                    }
                };
                out.push(pt);
            }
            Ok(out)
        })())
    }
}

/// Distance between homogeneous vectors: `arctan R`, or `π/2` when orthogonal.
pub fn fs_distance_homogeneous(p: &CVector, q: &CVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(GeometryError::Dimension {
            expected: p.len(),
            found: q.len(),
        });
    }
    let (np, nq) = (p.norm(), q.norm());
    if np == 0.0 || nq == 0.0 {
        return Err(GeometryError::Domain("zero homogeneous vector".into()));
    }
    let up = p / Complex64::new(np, 0.0);
    let uq = q / Complex64::new(nq, 0.0);
    let c = up.dotc(&uq);
    if c.norm() == 0.0 {
        return Ok(FRAC_PI_2);
    }
    let resid = (&uq - &up * c).norm();
    Ok(resid.atan2(c.norm()))
}

/// Distance between two points of a Fubini–Study model.
pub fn fs_distance(m: &FubiniStudy, p: &ChartPoint, q: &ChartPoint) -> Result<f64> {
    m.distance(p, q)
}

/// Orthonormalization of `(p, q)` reducing the pair to `[1 : 0]` and
/// `[δ : γ]` on an effective `ℙ¹`.
#[derive(Clone, Debug)]
pub struct GramSchmidtReduction {
    pub v1: CVector,
    pub v2: Option<CVector>,
    /// `⟨q, v1⟩`
    pub delta: Complex64,
    /// `⟨q, v2⟩ = ‖q − ⟨q,v1⟩v1‖`
    pub gamma: f64,
    /// `R = γ / |δ|`, infinite for orthogonal pairs.
    pub ratio: f64,
}

pub fn gram_schmidt_reduce(p: &CVector, q: &CVector) -> Result<GramSchmidtReduction> {
    let (np, nq) = (p.norm(), q.norm());
    if np == 0.0 || nq == 0.0 {
        return Err(GeometryError::Domain("zero homogeneous vector".into()));
    }
    let v1 = p / Complex64::new(np, 0.0);
    let uq = q / Complex64::new(nq, 0.0);
    let delta = v1.dotc(&uq);
    let resid = &uq - &v1 * delta;
    let gamma = resid.norm();
    let v2 = (gamma > 0.0).then(|| &resid / Complex64::new(gamma, 0.0));
    let ratio = if delta.norm() == 0.0 {
        f64::INFINITY
    } else {
        gamma / delta.norm()
    };
    Ok(GramSchmidtReduction {
        v1,
        v2,
        delta,
        gamma,
        ratio,
    })
}

/// Length of the chart-0 segment `t ↦ (t, 0, …, 0)`, `t ∈ [0, R]`, measured
/// with the model metric by composite Gauss–Legendre quadrature on
/// geometrically growing panels.
pub fn chart_path_length(m: &FubiniStudy, ratio: f64) -> Result<f64> {
    if ratio.is_nan() || ratio < 0.0 {
        return Err(GeometryError::InvalidParameter(format!(
            "segment end {ratio}"
        )));
    }
    if ratio.is_infinite() {
        return Ok(FRAC_PI_2);
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(20).unwrap());
    let n = m.dim();
    let speed = |t: f64| -> f64 {
        let mut coords = CVector::zeros(n);
        coords[0] = Complex64::new(t, 0.0);
        let p = ChartPoint::new(0, coords);
        let h = metric(m, &p).expect("chart-0 segment stays in the chart");
        h[(0, 0)].re.sqrt()
    };
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b = ratio.min(1.0);
    while a < ratio {
        total += rule.integrate(a, b, speed);
        a = b;
        b = (2.0 * b).min(ratio);
    }
    Ok(total)
}

/// Fubini–Study quadratic form of a homogeneous path sample against the
/// bound used in the completeness argument:
/// `lhs = (‖γ‖²‖γ′‖² − |⟨γ,γ′⟩|²)/‖γ‖⁴`, `rhs = 2‖γ′‖²/‖γ‖²`.
pub fn pl2_norm_bound_check(gamma: &CVector, dgamma: &CVector) -> Result<(f64, f64)> {
    if gamma.len() != dgamma.len() {
        return Err(GeometryError::Dimension {
            expected: gamma.len(),
            found: dgamma.len(),
        });
    }
    let g2 = gamma.norm_squared();
    if g2 == 0.0 {
        return Err(GeometryError::Domain("zero base vector".into()));
    }
    let d2 = dgamma.norm_squared();
    let cross = gamma.dotc(dgamma).norm_sqr();
    let lhs = ((g2 * d2 - cross) / (g2 * g2)).max(0.0);
    Ok((lhs, 2.0 * d2 / g2))
}
