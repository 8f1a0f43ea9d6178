//! Thin wrappers around nalgebra factorizations for ndarray-shaped data.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

pub fn to_dmatrix(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigendecomposition of a symmetric matrix; returns (values, vectors) with
/// vectors in columns, pairing preserved, no ordering guarantee.
pub fn sym_eigen(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let m = to_dmatrix(a.view());
    let eig = m.symmetric_eigen();
    let values = Array1::from_iter(eig.eigenvalues.iter().copied());
    let vectors = from_dmatrix(&eig.eigenvectors);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("symmetric eigendecomposition produced non-finite eigenvalues".into()));
    }
    Ok((values, vectors))
}

/// Lower-triangular Cholesky factor of a positive-definite matrix.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let m = to_dmatrix(a.view());
    let chol = nalgebra::Cholesky::new(m)
        .ok_or_else(|| Error::Numerical("Cholesky factorization failed (matrix not positive definite)".into()))?;
    Ok(from_dmatrix(&chol.l()))
}

/// Solves (A) x = b for symmetric positive-definite A via Cholesky.
pub fn solve_spd(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let m = to_dmatrix(a.view());
    let chol = nalgebra::Cholesky::new(m)
        .ok_or_else(|| Error::Numerical("Cholesky solve failed (matrix not positive definite)".into()))?;
    let rhs = DVector::from_iterator(b.len(), b.iter().copied());
    let x = chol.solve(&rhs);
    Ok(Array1::from_iter(x.iter().copied()))
}

/// Thin SVD `X = U diag(d) V^T` with `d` non-increasing, U: n x r, V: p x r.
pub fn thin_svd(x: ArrayView2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("SVD input contains non-finite entries".into()));
    }
    let m = to_dmatrix(x);
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not return V^T".into()))?;
    let d = svd.singular_values;
    // nalgebra sorts descending, but order defensively: downstream indexes eigen-columns.
    let r = d.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let u_sorted = Array2::from_shape_fn((u.nrows(), r), |(i, k)| u[(i, order[k])]);
    let v_sorted = Array2::from_shape_fn((v_t.ncols(), r), |(i, k)| v_t[(order[k], i)]);
    let d_sorted = Array1::from_iter(order.iter().map(|&k| d[k]));
    Ok((u_sorted, d_sorted, v_sorted))
}
