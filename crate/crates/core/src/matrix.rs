//! Dense row-major `f32` matrices.
//!
//! Node features and layer weights share this type. The multiply kernel sums
//! in ascending inner index starting from `0.0`, which is the order every
//! reference and engine path in the crate relies on for reproducibility.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

/// Per-node feature rows: `rows` nodes by `cols` feature dimensions.
pub type FeatureMatrix = Matrix;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f32) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Alias for `rows` when the matrix holds node features.
    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.rows
    }

    /// Alias for `cols` when the matrix holds node features.
    #[inline]
    pub fn dim(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f32) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    /// `self · rhs`, summing over the inner index in ascending order.
    /// Products accumulate in f64 and round once per output element.
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.matmul_acc(rhs, None)
    }

    /// `self * rhs + init`, with `init` entering the f64 accumulator first.
    pub fn matmul_acc(&self, rhs: &Matrix, init: Option<&Matrix>) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if let Some(p) = init {
            if (p.rows, p.cols) != (self.rows, rhs.cols) {
                return Err(Error::Shape(format!(
                    "initial {}x{} does not match a {}x{} product",
                    p.rows, p.cols, self.rows, rhs.cols
                )));
            }
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        let mut acc = vec![0.0f64; rhs.cols];
        for i in 0..self.rows {
            match init {
                Some(p) => acc.iter_mut().zip(p.row(i)).for_each(|(a, &x)| *a = x as f64),
                None => acc.iter_mut().for_each(|a| *a = 0.0),
            }
            for (k, &x) in self.row(i).iter().enumerate() {
                for (a, &w) in acc.iter_mut().zip(rhs.row(k)) {
                    *a += x as f64 * w as f64;
                }
            }
            for (o, &a) in out.row_mut(i).iter_mut().zip(&acc) {
                *o = a as f32;
            }
        }
        Ok(out)
    }

    /// Copies the given row and column ranges into a new matrix.
    pub fn slice(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (o, r) in rows.enumerate() {
            out.row_mut(o)
                .copy_from_slice(&self.row(r)[cols.start..cols.end]);
        }
        out
    }

    /// Overwrites the block whose top-left corner is `(row, col)` with `src`.
    pub fn set_block(&mut self, row: usize, col: usize, src: &Matrix) {
        for r in 0..src.rows {
            self.row_mut(row + r)[col..col + src.cols].copy_from_slice(src.row(r));
        }
    }

    /// Stacks `self` on top of `below` (same column count).
    pub fn vstack(&self, below: &Matrix) -> Result<Matrix> {
        if self.cols != below.cols {
            return Err(Error::Shape(format!(
                "vstack of {} and {} columns",
                self.cols, below.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(Matrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    /// Places `right` beside `self` (same row count).
    pub fn hstack(&self, right: &Matrix) -> Result<Matrix> {
        if self.rows != right.rows {
            return Err(Error::Shape(format!(
                "hstack of {} and {} rows",
                self.rows, right.rows
            )));
        }
        let cols = self.cols + right.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(right.row(r));
        }
        Ok(Matrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|v| !v.is_finite())
    }

    /// Largest `|a - b| / max(|b|, floor)` over all entries.
    pub fn max_rel_diff(&self, other: &Matrix, floor: f32) -> f32 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs() / b.abs().max(floor))
            .fold(0.0, f32::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f32 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![5.0], vec![6.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.as_slice(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_shape_error() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Error::Shape(_))));
    }

    #[test]
    fn stacking() {
        let a = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        assert_eq!(a.hstack(&b).unwrap().row(1), &[2.0, 4.0]);
        assert_eq!(a.vstack(&b).unwrap().as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }
}
