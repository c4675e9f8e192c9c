//! Dense symmetric eigendecomposition.
//!
//! Wraps nalgebra's Householder tridiagonalization and implicit QR, then
//! fixes the ordering and the sign of every eigenvector so results are
//! reproducible across runs.

use nalgebra::DMatrix;

use super::matrix::SymMatrix;
use crate::error::{Error, Result};

/// QR iteration budget per unit of matrix order.
const ITERATIONS_PER_ROW: usize = 100;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    order: usize,
    values: Vec<f64>,
    // row-major, column j is the eigenvector of values[j]
    vectors: Vec<f64>,
}

impl EigenPairs {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn vector_component(&self, i: usize, j: usize) -> f64 {
        self.vectors[i * self.order + j]
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.order).map(|i| self.vector_component(i, j)).collect()
    }

    /// Row-major `order x order` matrix whose columns are the eigenvectors.
    pub fn vectors_row_major(&self) -> &[f64] {
        &self.vectors
    }
}

/// Full eigendecomposition of a symmetric matrix.
///
/// `tol` is the relative threshold below which a subdiagonal entry of the
/// tridiagonal form counts as zero. Eigenvalues come back ascending (ties
/// keep the lower solver index first) and each eigenvector is signed so
/// that its largest-magnitude component is nonnegative.
pub fn sym_eigen(a: &SymMatrix, tol: f64) -> Result<EigenPairs> {
    let m = a.order();
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    if !a.is_finite() {
        return Err(Error::Dimension("matrix has non-finite entries".into()));
    }
    let dense = DMatrix::from_row_slice(m, m, &a.to_dense());
    let budget = ITERATIONS_PER_ROW * m;
    let eig =
        dense.try_symmetric_eigen(tol.max(f64::EPSILON), budget).ok_or(Error::NonConvergence { iterations: budget })?;

    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));

    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = vec![0.0; m * m];
    for (col, &src) in idx.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let mut best = 0;
        for i in 1..m {
            if v[i].abs() > v[best].abs() {
                best = i;
            }
        }
        let sign = if v[best] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..m {
            vectors[i * m + col] = sign * v[i];
        }
    }
    Ok(EigenPairs { order: m, values, vectors })
}
