//! Sparse nonnegative matrices with row- and column-major views.
//!
//! Both views are built once from the same sorted triplet list and never
//! mutated afterwards. Row sums (`A x`) always walk a row in increasing column
//! order and column sums (`A^T y`) walk a column in increasing row order, so
//! every reduction in the crate has a fixed summation order.

use crate::error::{Error, LineKind, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseNonnegMatrix {
    rows: usize,
    cols: usize,
    // CSR
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
    // CSC
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
}

impl SparseNonnegMatrix {
    /// Builds a matrix from 0-based `(row, col, value)` triplets.
    ///
    /// Zero values are dropped. Negative or non-finite values, out-of-range
    /// indices and repeated positions are rejected, as are matrices with an
    /// empty row or column.
    pub fn from_triplets<I>(rows: usize, cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimensions { rows, cols });
        }
        let mut triplets = Vec::new();
        for (row, col, value) in entries {
            if row >= rows || col >= cols {
                return Err(Error::IndexOutOfBounds {
                    row,
                    col,
                    rows,
                    cols,
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry { row, col });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { row, col, value });
            }
            if value > 0.0 {
                triplets.push((row, col, value));
            }
        }
        if triplets.is_empty() {
            return Err(Error::AllZero);
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        if let Some(w) = triplets
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::DuplicateEntry {
                row: w[0].0,
                col: w[0].1,
            });
        }

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_ptr = vec![0usize; cols + 1];
        for &(r, c, _) in &triplets {
            row_ptr[r + 1] += 1;
            col_ptr[c + 1] += 1;
        }
        for i in 0..rows {
            if row_ptr[i + 1] == 0 {
                return Err(Error::EmptyRowOrColumn {
                    kind: LineKind::Row,
                    index: i,
                });
            }
            row_ptr[i + 1] += row_ptr[i];
        }
        for j in 0..cols {
            if col_ptr[j + 1] == 0 {
                return Err(Error::EmptyRowOrColumn {
                    kind: LineKind::Column,
                    index: j,
                });
            }
            col_ptr[j + 1] += col_ptr[j];
        }

        let row_cols = triplets.iter().map(|t| t.1).collect();
        let row_vals = triplets.iter().map(|t| t.2).collect();

        // Row-major order is already sorted by (row, col); a stable bucket pass
        // yields the column-major view sorted by (col, row).
        let nnz = triplets.len();
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![0.0f64; nnz];
        let mut next = col_ptr.clone();
        for &(r, c, v) in &triplets {
            col_rows[next[c]] = r;
            col_vals[next[c]] = v;
            next[c] += 1;
        }

        Ok(Self {
            rows,
            cols,
            row_ptr,
            row_cols,
            row_vals,
            col_ptr,
            col_rows,
            col_vals,
        })
    }

    /// Dense row-major constructor, mostly for tests and small examples.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Self::from_triplets(
            m,
            n,
            rows.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_vals.len()
    }

    /// Entries of row `i` as `(col, value)`, increasing column.
    pub fn row(&self, i: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + Clone + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.row_cols[span.clone()]
            .iter()
            .copied()
            .zip(self.row_vals[span].iter().copied())
    }

    /// Entries of column `j` as `(row, value)`, increasing row.
    pub fn col(&self, j: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + Clone + '_ {
        let span = self.col_ptr[j]..self.col_ptr[j + 1];
        self.col_rows[span.clone()]
            .iter()
            .copied()
            .zip(self.col_vals[span].iter().copied())
    }

    /// All entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// All entries as `(row, col, value)` in column-major order.
    pub fn triplets_col_major(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |j| self.col(j).map(move |(i, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.row_cols[span.clone()].binary_search(&j) {
            Ok(k) => self.row_vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn min_entry(&self) -> f64 {
        self.row_vals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.row_vals.iter().copied().fold(0.0, f64::max)
    }

    /// Returns a copy with every entry divided by `divisor`.
    pub fn divided_by(&self, divisor: f64) -> Self {
        let mut out = self.clone();
        out.row_vals.iter_mut().for_each(|v| *v /= divisor);
        out.col_vals.iter_mut().for_each(|v| *v /= divisor);
        out
    }

    /// `A x`, each row summed in increasing column order.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|i| self.row(i).map(|(j, a)| a * x[j]).sum())
            .collect())
    }

    /// `A^T y`, each column summed in increasing row order.
    pub fn transpose_mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, y.len())?;
        Ok((0..self.cols)
            .map(|j| self.col(j).map(|(i, a)| a * y[i]).sum())
            .collect())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
