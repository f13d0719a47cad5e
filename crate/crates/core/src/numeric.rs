//! Compensated summation and Richardson-extrapolated central differences.

use num_complex::Complex64;

use crate::error::{GeometryError, Result};

/// Neumaier-compensated sum of real terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Compensated sum of complex terms (real and imaginary parts accumulated separately).
pub fn compensated_sum_c<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    let (re, im): (Vec<f64>, Vec<f64>) = terms.into_iter().map(|z| (z.re, z.im)).unzip();
    Complex64::new(compensated_sum(re), compensated_sum(im))
}

/// Minimum ratio between successive central-difference corrections, `2^1.9`.
pub const MIN_ORDER: f64 = 1.9;

/// Relative floor below which successive estimates are considered converged.
const CONVERGED_FLOOR: f64 = 1e-8;

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Central difference of a vector-valued function of one real parameter,
/// extrapolated from steps `t` and `t/2` and gated by an observed-order check
/// against a third estimate at `t/4`.
pub fn richardson_derivative<F>(f: F, t: f64) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Result<Vec<Complex64>>,
{
    let central = |h: f64| -> Result<(Vec<Complex64>, f64)> {
        let plus = f(h)?;
        let minus = f(-h)?;
        let scale = max_abs(&plus).max(max_abs(&minus));
        let d = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        Ok((d, scale))
    };
    let (d1, s1) = central(t)?;
    let (d2, _) = central(t / 2.0)?;
    let (d4, _) = central(t / 4.0)?;

    let coarse = max_diff(&d1, &d2);
    let fine = max_diff(&d2, &d4);
    let floor = CONVERGED_FLOOR * (1.0 + max_abs(&d2) + s1);
    if coarse > floor {
        let order = if fine > 0.0 {
            (coarse / fine).log2()
        } else {
            f64::INFINITY
        };
        if order < MIN_ORDER {
            return Err(GeometryError::FdNonConvergent {
                coarse,
                fine,
                order,
            });
        }
    }
    Ok(d1
        .iter()
        .zip(&d2)
        .map(|(a, b)| (4.0 * b - a) / 3.0)
        .collect())
}

/// Scalar convenience wrapper around [`richardson_derivative`].
pub fn richardson_scalar<F>(f: F, t: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let v = richardson_derivative(|h| f(h).map(|z| vec![z]), t)?;
    Ok(v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(terms), 2.0);
    }

    #[test]
    fn richardson_is_exact_on_cubics() {
        let d = richardson_scalar(|t| Ok(Complex64::new((1.0 + t).powi(3), t)), 1e-2).unwrap();
        assert!((d - Complex64::new(3.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn richardson_rejects_kinks() {
        let err = richardson_scalar(|t| Ok(Complex64::new((t - 1e-3).abs(), 0.0)), 1e-2);
        assert!(matches!(err, Err(GeometryError::FdNonConvergent { .. })));
    }
}
