//! Complex polynomials in ascending-power form and companion-matrix roots.

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Evaluates `Σ coeffs[k] z^k` by Horner's rule.
pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Derivative coefficients.
pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Product of two polynomials.
pub fn multiply(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `|p(z)| / Σ |c_k z^k|`: the residual relative to the size of the terms
/// that produced it.
pub fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let value = eval(coeffs, z).norm();
    let mut power = Complex64::new(1.0, 0.0);
    let mut scale = 0.0;
    for &c in coeffs {
        scale += (c * power).norm();
        power *= z;
    }
    if scale == 0.0 {
        value
    } else {
        value / scale
    }
}

/// All roots of a polynomial of degree ≥ 1 via the eigenvalues of its
/// companion matrix, each refined by a few Newton steps.
///
/// The variable is rescaled by `scale` before building the companion matrix
/// so that entries stay O(1) for physical frequencies; pass the natural
/// frequency of the problem (or 1.0).
pub fn roots(coeffs: &[Complex64], scale: f64) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    let lead = *coeffs.last().ok_or(Error::Eigen { degree })?;
    if degree == 0 || lead.norm() == 0.0 {
        return Err(Error::Eigen { degree });
    }
    // p(s·z) = Σ c_k s^k z^k, made monic.
    let mut scaled: Vec<Complex64> = Vec::with_capacity(coeffs.len());
    let mut power = 1.0;
    for &c in coeffs {
        scaled.push(c * power);
        power *= scale;
    }
    let lead_scaled = scaled[degree];

    let mut companion = DMatrix::<Complex<f64>>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = Complex::new(1.0, 0.0);
    }
    for (k, c) in scaled.iter().take(degree).enumerate() {
        companion[(k, degree - 1)] = -c / lead_scaled;
    }
    let eig = companion.eigenvalues().ok_or(Error::Eigen { degree })?;

    let deriv = derivative(coeffs);
    Ok(eig
        .iter()
        .map(|z| polish(coeffs, &deriv, z * scale))
        .collect())
}

fn polish(coeffs: &[Complex64], deriv: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut best = (relative_residual(coeffs, z), z);
    for _ in 0..4 {
        let dp = eval(deriv, z);
        if dp.norm() == 0.0 {
            break;
        }
        z -= eval(coeffs, z) / dp;
        let r = relative_residual(coeffs, z);
        if !r.is_finite() {
            break;
        }
        if r < best.0 {
            best = (r, z);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_known_quartic() {
        let expected = [c(1.0, -0.5), c(-2.0, 0.1), c(0.3, 3.0), c(0.0, -1.0)];
        let mut p = vec![c(1.0, 0.0)];
        for r in expected {
            p = multiply(&p, &[-r, c(1.0, 0.0)]);
        }
        let found = roots(&p, 1.0).unwrap();
        for r in expected {
            assert!(
                found.iter().any(|z| (z - r).norm() < 1e-12),
                "{r} not in {found:?}"
            );
        }
    }

    #[test]
    fn scaled_roots() {
        let s = 3.0e8;
        let expected = [c(1.2 * s, -1e3), c(-1.2 * s, -1e3), c(0.5 * s, -2e6)];
        let mut p = vec![c(1.0, 0.0)];
        for r in expected {
            p = multiply(&p, &[-r, c(1.0, 0.0)]);
        }
        let found = roots(&p, s).unwrap();
        for r in expected {
            assert!(found.iter().any(|z| (z - r).norm() < 1e-9 * s), "{r}");
        }
        for z in found {
            assert!(relative_residual(&p, z) < 1e-12);
        }
    }

    #[test]
    fn degenerate_input_rejected() {
        assert!(roots(&[c(1.0, 0.0)], 1.0).is_err());
        assert!(roots(&[c(1.0, 0.0), c(0.0, 0.0)], 1.0).is_err());
    }
}
