//! Small dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Hermitian spectra come from `nalgebra::SymmetricEigen`, which handles
//! complex Hermitian input and returns real eigenvalues. The triangular
//! factorization used by the local-operator canonical form is written out
//! here because its pivot convention matters.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

/// Largest entrywise deviation `|A - A^*|`.
pub fn asymmetry(a: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replaces `a` by its Hermitian part `(A + A^*)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    hermitian_eigen(a).0
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

/// `lambda_max / lambda_min` of a Hermitian positive definite matrix; infinite otherwise.
pub fn condition_number(a: &CMatrix) -> f64 {
    let values = hermitian_eigenvalues(a);
    match (values.first(), values.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Factor a Hermitian positive definite `g` as `U^* U` with `U` upper triangular
/// and strictly positive real diagonal.
pub fn cholesky_upper(g: &CMatrix) -> Result<CMatrix> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky of a {}x{} matrix",
            n,
            g.ncols()
        )));
    }
    let mut u = CMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = g[(i, i)].re;
        for k in 0..i {
            diag -= u[(k, i)].norm_sqr();
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = diag.sqrt();
        u[(i, i)] = c(d, 0.0);
        for j in (i + 1)..n {
            let mut s = g[(i, j)];
            for k in 0..i {
                s -= u[(k, i)].conj() * u[(k, j)];
            }
            u[(i, j)] = s / d;
        }
    }
    Ok(u)
}

/// Inverse of an upper triangular matrix by back substitution; the result is
/// upper triangular with exact zeros below the diagonal.
pub fn invert_upper(u: &CMatrix) -> Result<CMatrix> {
    let n = u.nrows();
    let mut inv = CMatrix::zeros(n, n);
    for j in 0..n {
        if u[(j, j)].norm() == 0.0 {
            return Err(Error::SingularGram);
        }
        inv[(j, j)] = u[(j, j)].inv();
        for i in (0..j).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in (i + 1)..=j {
                s += u[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / u[(i, i)];
        }
    }
    Ok(inv)
}

/// General inverse via LU.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    a.clone().try_inverse().ok_or(Error::SingularGram)
}

/// `h^{-1/2}` for Hermitian positive definite `h`.
pub fn inverse_sqrt(h: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h);
    if values.first().is_none_or(|&v| v <= 0.0) {
        return Err(Error::SingularMetric);
    }
    let scales: Vec<f64> = values.iter().map(|v| v.sqrt().recip()).collect();
    Ok(&vectors * real_diag(&scales) * vectors.adjoint())
}

/// Copy of the block `[r0, r0+rows) x [c0, c0+cols)`.
pub fn block(a: &CMatrix, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
    a.view((r0, c0), (rows, cols)).into_owned()
}

pub fn set_block(a: &mut CMatrix, r0: usize, c0: usize, b: &CMatrix) {
    a.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}
