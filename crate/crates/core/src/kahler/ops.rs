use num_complex::Complex64;

use super::model::{metric, metric_derivatives, KahlerModel, MetricDerivatives};
use super::point::{CMatrix, CVector, ChartPoint, TangentVec};
use crate::error::{GeometryError, Result};

fn common_base<'a>(vs: &[&'a TangentVec]) -> Result<&'a ChartPoint> {
    let base = &vs[0].base;
    for v in vs {
        v.check_dim()?;
        if v.base != *base {
            return Err(GeometryError::BaseMismatch);
        }
    }
    Ok(base)
}

/// `Σ h_ij a_i conj(b_j)` for a given metric matrix.
pub fn hermitian_form(h: &CMatrix, a: &CVector, b: &CVector) -> Complex64 {
    let hb = h * b.map(|z| z.conj());
    a.iter().zip(hb.iter()).map(|(x, y)| x * y).sum()
}

/// Pointwise Hermitian product `h(u, v)`.
pub fn h_inner(m: &dyn KahlerModel, u: &TangentVec, v: &TangentVec) -> Result<Complex64> {
    let base = common_base(&[u, v])?;
    let h = metric(m, base)?;
    Ok(hermitian_form(&h, &u.components, &v.components))
}

/// Pointwise form `ω(u, v) = −Im h(u, v)`.
pub fn omega_eval(m: &dyn KahlerModel, u: &TangentVec, v: &TangentVec) -> Result<f64> {
    Ok(-h_inner(m, u, v)?.im)
}

fn d_omega_from(d: &MetricDerivatives, u: &CVector, v: &CVector, w: &CVector) -> f64 {
    // dω = (i/2) Σ (∂_k h_ij dz_k + ∂̄_k h_ij dz̄_k) ∧ dz_i ∧ dz̄_j, evaluated as a
    // signed sum over permutations of (u, v, w).
    let perms: [(&CVector, &CVector, &CVector, f64); 6] = [
        (u, v, w, 1.0),
        (v, w, u, 1.0),
        (w, u, v, 1.0),
        (v, u, w, -1.0),
        (u, w, v, -1.0),
        (w, v, u, -1.0),
    ];
    let mut total = Complex64::new(0.0, 0.0);
    for (a, b, c, sign) in perms {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..a.len() {
            acc += a[k] * hermitian_form(&d.dz[k], b, c);
            acc += a[k].conj() * hermitian_form(&d.dzbar[k], b, c);
        }
        total += acc * sign;
    }
    (Complex64::new(0.0, 0.5) * total).re
}

/// Exterior derivative of the form, `dω(u, v, w)`, from the first
/// derivatives of the metric.
pub fn d_omega_eval(
    m: &dyn KahlerModel,
    u: &TangentVec,
    v: &TangentVec,
    w: &TangentVec,
) -> Result<f64> {
    let base = common_base(&[u, v, w])?;
    let d = metric_derivatives(m, base)?;
    Ok(d_omega_from(
        &d,
        &u.components,
        &v.components,
        &w.components,
    ))
}

/// Christoffel symbols `Γ^k_ij = Σ_l h^{k l̄} ∂h_{j l̄}/∂z_i` of the Kähler
/// (Levi-Civita) connection in holomorphic coordinates.
#[derive(Clone, Debug)]
pub struct Christoffels {
    n: usize,
    data: Vec<Complex64>,
}

impl Christoffels {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^k_ij`
    pub fn get(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// `Γ(a, b)^k = Σ_ij Γ^k_ij a_i b_j`
    pub fn contract(&self, a: &CVector, b: &CVector) -> CVector {
        let n = self.n;
        CVector::from_fn(n, |k, _| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    s += self.get(k, i, j) * a[i] * b[j];
                }
            }
            s
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.norm() == 0.0)
    }
}

pub(crate) fn christoffels_from(h: &CMatrix, d: &MetricDerivatives) -> Result<Christoffels> {
    let n = h.nrows();
    // Σ_l G_kl h_jl = δ_kj  ⇒  G = (hᵀ)⁻¹
    let g = h
        .transpose()
        .try_inverse()
        .ok_or(GeometryError::SingularMetric)?;
    let mut data = vec![Complex64::new(0.0, 0.0); n * n * n];
    for i in 0..n {
        let c = &g * d.dz[i].transpose();
        for k in 0..n {
            for j in 0..n {
                data[(k * n + i) * n + j] = c[(k, j)];
            }
        }
    }
    Ok(Christoffels { n, data })
}

/// Christoffel symbols at `z`; only defined on Kähler models.
pub fn christoffels(m: &dyn KahlerModel, z: &ChartPoint) -> Result<Christoffels> {
    if !m.is_kahler_expected() {
        return Err(GeometryError::NotKahler(m.name().to_string()));
    }
    let h = metric(m, z)?;
    let d = metric_derivatives(m, z)?;
    christoffels_from(&h, &d)
}

/// Largest entry of `h − h†` at a point.
pub fn hermitian_defect(m: &dyn KahlerModel, z: &ChartPoint) -> Result<f64> {
    let h = metric(m, z)?;
    Ok((&h - h.adjoint())
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max))
}

/// Whether the metric is positive-definite at `z` (Cholesky succeeds).
pub fn is_positive_definite(m: &dyn KahlerModel, z: &ChartPoint) -> Result<bool> {
    let h = metric(m, z)?;
    // nalgebra's Cholesky factors h = L L†, which needs the transpose of our
    // index convention; positivity is unaffected.
    Ok(h.transpose().cholesky().is_some())
}

/// One state of an integrated geodesic.
#[derive(Clone, Debug)]
pub struct GeodesicSample {
    pub point: ChartPoint,
    pub velocity: CVector,
}

fn geodesic_rhs(
    m: &dyn KahlerModel,
    chart: usize,
    z: &CVector,
    v: &CVector,
) -> Result<(CVector, CVector)> {
    let p = ChartPoint::new(chart, z.clone());
    let gamma = christoffels(m, &p)?;
    Ok((v.clone(), -gamma.contract(v, v)))
}

/// Classical fixed-step RK4 for `z̈^k + Γ^k_ij ż^i ż^j = 0` over `[0, T]`,
/// switching charts whenever the state leaves the safe region.
pub fn integrate_geodesic(
    m: &dyn KahlerModel,
    z0: &ChartPoint,
    v0: &TangentVec,
    t_end: f64,
    steps: usize,
) -> Result<Vec<GeodesicSample>> {
    if steps == 0 {
        return Err(GeometryError::InvalidParameter(
            "steps must be at least 1".into(),
        ));
    }
    if !m.is_kahler_expected() {
        return Err(GeometryError::NotKahler(m.name().to_string()));
    }
    if v0.base != *z0 {
        return Err(GeometryError::BaseMismatch);
    }
    m.validate(z0)?;
    let dt = t_end / steps as f64;
    let half = Complex64::new(dt / 2.0, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    let mut state = GeodesicSample {
        point: z0.clone(),
        velocity: v0.components.clone(),
    };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    for _ in 0..steps {
        let chart = state.point.chart;
        let (z, v) = (&state.point.coords, &state.velocity);
        let (k1z, k1v) = geodesic_rhs(m, chart, z, v)?;
        let (k2z, k2v) = geodesic_rhs(m, chart, &(z + &k1z * half), &(v + &k1v * half))?;
        let (k3z, k3v) = geodesic_rhs(m, chart, &(z + &k2z * half), &(v + &k2v * half))?;
        let (k4z, k4v) = geodesic_rhs(m, chart, &(z + &k3z * full), &(v + &k3v * full))?;
        let z_next = z + (k1z + &k2z * two + &k3z * two + k4z) * sixth;
        let v_next = v + (k1v + &k2v * two + &k3v * two + k4v) * sixth;
        let point = ChartPoint::new(chart, z_next);
        m.validate(&point)?;
        let mut next = GeodesicSample {
            point,
            velocity: v_next,
        };
        if !m.is_safe(&next.point) {
            let to = m.preferred_chart(&next.point);
            let pushed = m.push_tangent(
                &TangentVec::new(next.point.clone(), next.velocity.clone()),
                to,
            )?;
            next = GeodesicSample {
                point: pushed.base,
                velocity: pushed.components,
            };
        }
        out.push(next.clone());
        state = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::{FlatSpace, FubiniStudy, PerturbedHermitian};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flat_inner_product_of_unit_vector() {
        let m = FlatSpace::new(1);
        let p = ChartPoint::origin(0, 1);
        let u = TangentVec::from_slice(p.clone(), &[c(1.0, 0.0)]);
        assert_eq!(h_inner(&m, &u, &u).unwrap(), c(1.0, 0.0));
        let zero = TangentVec::zero(p);
        assert_eq!(h_inner(&m, &zero, &zero).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn flat_form_on_u_and_iu() {
        let m = FlatSpace::new(1);
        let p = ChartPoint::origin(0, 1);
        let u = TangentVec::from_slice(p.clone(), &[c(1.0, 0.0)]);
        let v = TangentVec::from_slice(p, &[c(0.0, 1.0)]);
        assert_eq!(omega_eval(&m, &u, &v).unwrap(), 1.0);
        assert_eq!(omega_eval(&m, &u, &u).unwrap(), 0.0);
    }

    #[test]
    fn base_mismatch_is_rejected() {
        let m = FlatSpace::new(1);
        let u = TangentVec::from_slice(ChartPoint::origin(0, 1), &[c(1.0, 0.0)]);
        let v = TangentVec::from_slice(ChartPoint::from_slice(0, &[c(0.5, 0.0)]), &[c(1.0, 0.0)]);
        assert!(matches!(
            h_inner(&m, &u, &v),
            Err(GeometryError::BaseMismatch)
        ));
    }

    #[test]
    fn christoffels_refused_off_kahler_locus() {
        let m = PerturbedHermitian::default();
        let p = ChartPoint::origin(0, 2);
        assert!(matches!(
            christoffels(&m, &p),
            Err(GeometryError::NotKahler(_))
        ));
    }

    #[test]
    fn p1_christoffel_vanishes_at_origin() {
        let m = FubiniStudy::p1();
        let g = christoffels(&m, &ChartPoint::origin(0, 1)).unwrap();
        assert_eq!(g.get(0, 0, 0), c(0.0, 0.0));
    }

    #[test]
    fn flat_geodesic_is_a_line() {
        let m = FlatSpace::new(1);
        let p = ChartPoint::origin(0, 1);
        let v = TangentVec::from_slice(p.clone(), &[c(1.0, 0.0)]);
        let path = integrate_geodesic(&m, &p, &v, 1.0, 10).unwrap();
        assert!((path.last().unwrap().point.coords[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_steps_rejected() {
        let m = FlatSpace::new(1);
        let p = ChartPoint::origin(0, 1);
        let v = TangentVec::zero(p.clone());
        assert!(integrate_geodesic(&m, &p, &v, 1.0, 0).is_err());
    }
}
