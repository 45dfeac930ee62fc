//! Dense real matrices, stored column by column.
//!
//! Column-major storage makes the tensor matricizations in [`crate::einstein`]
//! reshapes of the tensor buffer: entry `(i, j)` of `f(A)` sits at flat
//! position `i + j * rows`, the same place as the tensor entry it mirrors.

use std::ops::Index;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Wraps a column-major buffer.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::shape("ragged rows"));
        }
        Matrix::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix::from_col_major(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Matrix::from_col_major(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Matrix::from_fn(values.len(), values.len(), |i, j| {
            if i == j {
                values[i]
            } else {
                0.0
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.rows] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = vec![0.0; self.data.len()];
        for j in 0..self.cols {
            for i in 0..self.rows {
                out[j + i * self.cols] = self.data[i + j * self.rows];
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![0.0; self.rows * other.cols];
        for j in 0..other.cols {
            let dst = &mut out[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other.data[k + j * other.rows];
                if b == 0.0 {
                    continue;
                }
                for (o, &a) in dst.iter_mut().zip(self.column(k)) {
                    *o += a * b;
                }
            }
        }
        Matrix::from_col_major(self.rows, other.cols, out)
    }

    /// `self^T * other`, computed as column dot products.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::shape(format!(
                "cannot form A^T B with A {}x{} and B {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Matrix::from_fn(self.cols, other.cols, |i, j| {
            dot(self.column(i), other.column(j))
        })
    }

    /// `self * other^T`.
    pub fn matmul_t(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::shape(format!(
                "cannot form A B^T with A {}x{} and B {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.matmul(&other.transpose())
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::shape(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
        Ok(out)
    }

    /// `x^T M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let my = self.mat_vec(y)?;
        if x.len() != self.rows {
            return Err(Error::shape("left vector length does not match rows"));
        }
        Ok(dot(x, &my))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::shape("matrix dimension mismatch"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix::from_col_major(self.rows, self.cols, data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest `|M_ij - M_ji|`; infinite for non-square input.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// The symmetric block matrix `[[0, B], [B^T, 0]]`.
    pub fn hermitian_dilation(&self) -> Matrix {
        let (r, c) = (self.rows, self.cols);
        let n = r + c;
        let mut h = Matrix {
            rows: n,
            cols: n,
            data: vec![0.0; n * n],
        };
        for j in 0..c {
            for i in 0..r {
                let v = self.get(i, j);
                h.set(i, r + j, v);
                h.set(r + j, i, v);
            }
        }
        h
    }

    /// Block-diagonal matrix `diag(self, other)`.
    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        let rows = self.rows + other.rows;
        let cols = self.cols + other.cols;
        let mut out = Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        };
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.set(i, j, self.get(i, j));
            }
        }
        for j in 0..other.cols {
            for i in 0..other.rows {
                out.set(self.rows + i, self.cols + j, other.get(i, j));
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i + j * self.rows]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
