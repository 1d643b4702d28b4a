//! Thin helpers over `faer` used across the crate.

use faer::{ColRef, Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

/// `a * x` for a dense complex matrix and a vector slice.
pub fn matvec(a: MatRef<'_, Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len());
    let y = a * ColRef::from_slice(x);
    y.iter().copied().collect()
}

/// `a^† * x`.
pub fn adjoint_matvec(a: MatRef<'_, Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.nrows(), x.len());
    let y = a.adjoint() * ColRef::from_slice(x);
    y.iter().copied().collect()
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(a: MatRef<'_, Complex64>) -> Result<(Vec<f64>, CMat)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let energies = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((energies, evd.U().to_owned()))
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))
}

pub fn max_abs(a: MatRef<'_, Complex64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// `max |a - a^†|` elementwise.
pub fn hermiticity_residual(a: MatRef<'_, Complex64>) -> f64 {
    let n = a.nrows();
    let mut r = 0.0f64;
    for j in 0..n {
        for i in j..n {
            r = r.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    r
}

/// `max |a - b|` elementwise.
pub fn max_abs_diff(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut r = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            r = r.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    r
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
