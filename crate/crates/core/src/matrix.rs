//! Dense column-major data matrix: rows are observations, columns are variables.

use crate::error::{Error, Result};

/// Dense numeric matrix stored column-major. Every entry is finite by
/// construction; `new` rejects NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl DataMatrix {
    /// Builds a matrix from column-major storage, validating shape and finiteness.
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for a {}x{} matrix, got {}",
                n_rows * n_cols,
                n_rows,
                n_cols,
                values.len()
            )));
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx % n_rows.max(1),
                    col: idx / n_rows.max(1),
                });
            }
        }
        Ok(Self { values, n_rows, n_cols })
    }

    /// Builds a matrix from owned columns (all of equal length).
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n_cols = columns.len();
        let n_rows = columns.first().map_or(0, |c| c.len());
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n_rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {} has length {}, expected {}",
                    j,
                    col.len(),
                    n_rows
                )));
            }
            values.extend_from_slice(col);
        }
        Self::new(n_rows, n_cols, values)
    }

    /// Single-column matrix.
    pub fn from_column(column: Vec<f64>) -> Result<Self> {
        let n = column.len();
        Self::new(n, 1, column)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            values: vec![0.0; n_rows * n_cols],
            n_rows,
            n_cols,
        }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Contiguous view of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        let start = j * self.n_rows;
        &self.values[start..start + self.n_rows]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        let start = j * self.n_rows;
        &mut self.values[start..start + self.n_rows]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n_rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.n_rows + i] = v;
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n_cols).map(|j| self.get(i, j)).collect()
    }

    /// New matrix holding the listed columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.n_rows * indices.len());
        for &j in indices {
            values.extend_from_slice(self.column(j));
        }
        Self {
            values,
            n_rows: self.n_rows,
            n_cols: indices.len(),
        }
    }

    /// New matrix holding the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(indices.len(), self.n_cols);
        for j in 0..self.n_cols {
            let src = self.column(j);
            let dst = out.column_mut(j);
            for (r, &i) in indices.iter().enumerate() {
                dst[r] = src[i];
            }
        }
        out
    }

    /// All columns except `drop_a` and `drop_b`, preserving order.
    pub fn drop_two_columns(&self, drop_a: usize, drop_b: usize) -> Self {
        let keep: Vec<usize> = (0..self.n_cols)
            .filter(|&j| j != drop_a && j != drop_b)
            .collect();
        self.select_columns(&keep)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let nf = self.n_rows as f64;
        (0..self.n_cols)
            .map(|j| self.column(j).iter().sum::<f64>() / nf)
            .collect()
    }

    /// Validates the distance-covariance preconditions: n >= 2 and all finite.
    pub(crate) fn check_sample(&self) -> Result<()> {
        if self.n_rows < 2 {
            return Err(Error::TooFewObservations {
                min: 2,
                got: self.n_rows,
            });
        }
        for j in 0..self.n_cols {
            for (i, v) in self.column(j).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}
