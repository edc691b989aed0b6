//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 0;

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(matrix: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(matrix.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Ascending eigenvalues with the matching unit eigenvectors (as columns).
pub fn hermitian_eigen(matrix: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let eig = SymmetricEigen::try_new(matrix.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(matrix.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, vectors))
}

/// Complex logarithm of `det(matrix)` from a partially pivoted LU
/// factorisation, summing logs of the pivots so large matrices never
/// overflow. Returns `None` when a pivot is exactly zero.
pub fn log_det(matrix: DMatrix<Complex64>) -> Option<Complex64> {
    let lu = matrix.lu();
    let sign = lu.p().determinant::<Complex64>();
    let u = lu.u();
    let mut log = Complex64::new(0.0, 0.0);
    for k in 0..u.nrows() {
        let pivot = u[(k, k)];
        if pivot.norm() == 0.0 {
            return None;
        }
        log += pivot.ln();
    }
    Some(log + sign.ln())
}

/// `log det(H - z)` for Hermitian `H`.
pub fn log_det_shifted(h: &DMatrix<Complex64>, z: Complex64) -> Option<Complex64> {
    let mut shifted = h.clone();
    for k in 0..shifted.nrows() {
        shifted[(k, k)] -= z;
    }
    log_det(shifted)
}

/// Inverse participation ratio `Σ_i |ψ_i|⁴` of a normalised vector.
pub fn inverse_participation_ratio(vector: &DVector<Complex64>) -> f64 {
    vector.iter().map(|z| z.norm_sqr().powi(2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_diagonal_spectra() {
        let zero = DMatrix::<Complex64>::zeros(4, 4);
        assert_eq!(hermitian_eigenvalues(&zero).unwrap(), vec![0.0; 4]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        assert_eq!(hermitian_eigenvalues(&d).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn log_det_matches_product_of_eigenvalue_shifts() {
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(0.3, 0.0),
                Complex64::new(0.1, 0.2),
                Complex64::new(-0.4, 0.1),
                Complex64::new(0.1, -0.2),
                Complex64::new(-0.7, 0.0),
                Complex64::new(0.05, 0.3),
                Complex64::new(-0.4, -0.1),
                Complex64::new(0.05, -0.3),
                Complex64::new(1.1, 0.0),
            ],
        );
        let z = Complex64::new(0.2, 0.1);
        let eigs = hermitian_eigenvalues(&h).unwrap();
        let direct: Complex64 = eigs.iter().map(|&l| Complex64::new(l, 0.0) - z).product();
        let via_lu = log_det_shifted(&h, z).unwrap().exp();
        assert!((direct - via_lu).norm() < 1e-13 * direct.norm());
    }

    #[test]
    fn log_det_of_large_matrix_does_not_overflow() {
        let n = 400;
        let m = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(1e3, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let log = log_det(m).unwrap();
        assert!((log.re - n as f64 * 1e3f64.ln()).abs() < 1e-9);
        assert!(log.im.rem_euclid(2.0 * std::f64::consts::PI).min(
            2.0 * std::f64::consts::PI - log.im.rem_euclid(2.0 * std::f64::consts::PI)
        ) < 1e-12);
    }

    #[test]
    fn ipr_of_extreme_vectors() {
        let n = 16;
        let flat = DVector::from_element(n, Complex64::new((1.0 / n as f64).sqrt(), 0.0));
        assert!((inverse_participation_ratio(&flat) - 1.0 / n as f64).abs() < 1e-15);
        let mut e1 = DVector::zeros(n);
        e1[0] = Complex64::new(1.0, 0.0);
        assert_eq!(inverse_participation_ratio(&e1), 1.0);
    }
}
