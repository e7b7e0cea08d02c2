//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{AffineError, Result};

/// Tolerance for symmetry and PSD checks: `1e-10 * (1 + |A|_F)`.
pub fn psd_tolerance(a: &DMatrix<f64>) -> f64 {
    1e-10 * (1.0 + a.norm())
}

/// Largest elementwise asymmetry `max |A_kl - A_lk|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..a.nrows() {
        for l in 0..k {
            worst = worst.max((a[(k, l)] - a[(l, k)]).abs());
        }
    }
    worst
}

/// Smallest eigenvalue of the symmetric part of `a`; `+inf` for an empty matrix.
pub fn min_sym_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (a + a.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

/// `max Re(lambda)` over the eigenvalues of `beta`; `-inf` for an empty matrix.
pub fn spectral_abscissa(beta: &DMatrix<f64>) -> f64 {
    eigenvalues(beta).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// `e^{A t}` by scaling and squaring with a Pade approximant.
pub fn expm(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    if a.nrows() == 0 {
        return DMatrix::zeros(0, 0);
    }
    (a * t).exp()
}

/// Solves `beta^T M + M beta = -I` through the vectorised `k^2 x k^2` system.
pub fn lyapunov_gram(beta: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = beta.nrows();
    if beta.ncols() != k {
        return Err(AffineError::Dimension("Lyapunov block must be square".into()));
    }
    if k == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let abscissa = spectral_abscissa(beta);
    if !(abscissa < 0.0) {
        return Err(AffineError::Domain(format!(
            "block is not stable: spectral abscissa {abscissa}"
        )));
    }
    // vec(B^T M + M B) = (I x B^T + B^T x I) vec(M) with column-major vec.
    let id = DMatrix::<f64>::identity(k, k);
    let bt = beta.transpose();
    let lhs = id.kronecker(&bt) + bt.kronecker(&id);
    let rhs = -DVector::from_iterator(k * k, id.iter().cloned());
    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| AffineError::Degenerate("singular Lyapunov operator".into()))?;
    let m = DMatrix::from_column_slice(k, k, sol.as_slice());
    Ok((&m + m.transpose()) * 0.5)
}

/// Frobenius norm of `beta^T M + M beta + I`.
pub fn lyapunov_residual(beta: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let k = beta.nrows();
    (beta.transpose() * m + m * beta + DMatrix::<f64>::identity(k, k)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abscissa_examples() {
        assert_eq!(
            spectral_abscissa(&DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]))),
            -1.0
        );
        assert_eq!(
            spectral_abscissa(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])),
            0.0
        );
        assert_eq!(spectral_abscissa(&DMatrix::from_element(1, 1, -1.0)), -1.0);
        let rot = DMatrix::from_row_slice(2, 2, &[-0.5, 2.0, -2.0, -0.5]);
        assert!((spectral_abscissa(&rot) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn gram_examples() {
        let m = lyapunov_gram(&DMatrix::from_element(1, 1, -1.0)).unwrap();
        assert!((m[(0, 0)] - 0.5).abs() < 1e-15);
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        let m = lyapunov_gram(&b).unwrap();
        assert!((m[(0, 0)] - 0.5).abs() < 1e-14 && (m[(1, 1)] - 0.25).abs() < 1e-14);
        assert!(m[(0, 1)].abs() < 1e-15);
        let nonnormal = DMatrix::from_row_slice(2, 2, &[-1.0, 5.0, 0.0, -2.0]);
        let m = lyapunov_gram(&nonnormal).unwrap();
        assert!(lyapunov_residual(&nonnormal, &m) < 1e-12);
        assert!(lyapunov_gram(&DMatrix::from_element(1, 1, 0.0)).is_err());
    }

    #[test]
    fn expm_matches_scalar_and_rotation() {
        let e = expm(&DMatrix::from_element(1, 1, -1.0), 2.0);
        assert!((e[(0, 0)] - (-2.0f64).exp()).abs() < 1e-15);
        let gen = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let r = expm(&gen, 0.3);
        assert!((r[(0, 0)] - 0.3f64.cos()).abs() < 1e-15);
        assert!((r[(1, 0)] - 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn psd_helpers() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(min_sym_eigenvalue(&a).abs() < 1e-15);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!((min_sym_eigenvalue(&b) + 1.0).abs() < 1e-14);
        assert_eq!(asymmetry(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0])), 0.5);
    }
}
