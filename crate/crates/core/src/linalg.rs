//! Small dense-matrix helpers shared by the covariance and parameterization
//! modules. Everything here assumes the desk-scale regime: dense symmetric
//! matrices of at most a few hundred rows, full eigendecompositions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest absolute entry, 0.0 for an empty matrix.
pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Maximum absolute asymmetry |m_ij - m_ji| over all pairs.
pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Minimum eigenvalue of a symmetric matrix via full eigendecomposition.
pub(crate) fn sym_min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Maximum eigenvalue of a symmetric matrix.
pub(crate) fn sym_max_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Leading singular triple (u, v, d) of a rectangular matrix together with
/// the ratio of the second to the first singular value (0 when there is no
/// second value). Returns `None` for a matrix whose leading singular value
/// is exactly zero.
pub(crate) fn leading_singular_triple(
    m: &DMatrix<f64>,
) -> Option<(DVector<f64>, DVector<f64>, f64, f64)> {
    let svd = m.clone().svd(true, true);
    let s = &svd.singular_values;
    if s.len() == 0 || s[0] <= 0.0 {
        return None;
    }
    let d = s[0];
    let ratio = if s.len() > 1 { s[1] / d } else { 0.0 };
    let u = svd.u.as_ref().expect("svd with u").column(0).clone_owned();
    let v = svd.v_t.as_ref().expect("svd with v_t").row(0).transpose();
    Some((u, v, d, ratio))
}

/// Singular values of the matrix, descending.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    m.clone().svd(false, false).singular_values
}

/// Symmetric square root of a PSD matrix, clamping eigenvalues that are
/// negative by floating-point noise to zero. Eigenvalues below
/// `-tol_abs` are rejected: the matrix is genuinely indefinite.
pub(crate) fn psd_sqrt_clamped(m: &DMatrix<f64>, tol_abs: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut roots = DVector::zeros(n);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -tol_abs {
            return Err(Error::SingularFactorization { min_eig: lambda });
        }
        roots[i] = lambda.max(0.0).sqrt();
    }
    let scaled = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
    Ok(&scaled * eig.eigenvectors.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_triple_recovers_rank_one() {
        let a = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 0.5]);
        let m = &a * b.transpose();
        let (u, v, d, ratio) = leading_singular_triple(&m).unwrap();
        let recon = &u * v.transpose() * d;
        assert!((recon - &m).abs().max() < 1e-12);
        assert!(ratio < 1e-14);
        assert!((d - (35.0f64 / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn singular_values_are_descending() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let s = singular_values(&m);
        assert!((s[0] - 3.0).abs() < 1e-14);
        assert!((s[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let root = psd_sqrt_clamped(&g, 1e-12).unwrap();
        assert!((&root * &root - g).abs().max() < 1e-12);
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(psd_sqrt_clamped(&g, 1e-9), Err(Error::SingularFactorization { .. })));
    }
}
