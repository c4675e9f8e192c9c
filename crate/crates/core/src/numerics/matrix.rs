use crate::error::{Error, Result};

/// Dense row-major `n x d` matrix of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values, rejecting empty shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput);
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!("{} values cannot fill a {rows}x{cols} matrix", values.len())));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / cols, col: pos % cols });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!("row {i} has {} columns, expected {cols}", r.len())));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self::new(idx.len(), self.cols, values)
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.cols];
        for r in self.iter_rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        let n = self.rows as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Applies `f` to every value. The result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Per-column `(min, max)`.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bb = vec![(f64::INFINITY, f64::NEG_INFINITY); self.cols];
        for r in self.iter_rows() {
            for (b, &v) in bb.iter_mut().zip(r) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        bb
    }
}

/// Symmetric matrix stored as its packed lower triangle, so `get(i, j)` and
/// `get(j, i)` read the same cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    lower: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        Self { order, lower: vec![0.0; order * (order + 1) / 2] }
    }

    /// Builds from a full row-major square matrix, reading only the lower
    /// triangle.
    pub fn from_lower_of(order: usize, full: &[f64]) -> Result<Self> {
        if full.len() != order * order {
            return Err(Error::Dimension(format!("{} values do not form a {order}x{order} matrix", full.len())));
        }
        let mut s = Self::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                s.set(i, j, full[i * order + j]);
            }
        }
        Ok(s)
    }

    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut s = Self::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                s.set(i, j, f(i, j));
            }
        }
        s
    }

    #[inline]
    fn offset(i: usize, j: usize) -> usize {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        hi * (hi + 1) / 2 + lo
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[Self::offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[Self::offset(i, j)] = v;
    }

    /// All `order^2` entries, row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.order;
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.order {
            for j in 0..self.order {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { order: self.order, lower: self.lower.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = DataMatrix::new(2, 2, vec![1.0, 2.0, f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, col: 0 }));
        assert!(matches!(DataMatrix::new(0, 3, vec![]), Err(Error::EmptyInput)));
    }

    #[test]
    fn sym_storage_is_shared() {
        let mut s = SymMatrix::zeros(3);
        s.set(0, 2, 4.0);
        assert_eq!(s.get(2, 0), 4.0);
        assert_eq!(s.to_dense()[2], 4.0);
        assert_eq!(s.to_dense()[6], 4.0);
    }
}
