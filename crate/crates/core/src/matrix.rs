//! Dense row-major feature matrix consumed by every learner.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_cols == 0 {
            return Err(Error::Train("feature matrix needs at least one column".into()));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::Train(format!(
                "matrix shape mismatch: {} values for {}x{}",
                values.len(),
                n_rows,
                n_cols
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Train("non-finite value in feature matrix".into()));
        }
        Ok(Self { n_rows, n_cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            if r.len() != n_cols {
                return Err(Error::Train("ragged rows in feature matrix".into()));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), n_cols.max(1), if rows.is_empty() { Vec::new() } else { values })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols)
    }

    /// Select a subset of rows into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            if i >= self.n_rows {
                return Err(Error::Train(format!("row index {i} out of bounds")));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.n_cols, values)
    }

    /// Column means and standard deviations (population), with zero stds
    /// replaced by 1 so constant columns pass through scaling untouched.
    pub fn column_stats(&self) -> (Vec<f64>, Vec<f64>) {
        let mut means = vec![0.0; self.n_cols];
        let mut stds = vec![0.0; self.n_cols];
        if self.n_rows == 0 {
            return (means, vec![1.0; self.n_cols]);
        }
        for row in self.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= self.n_rows as f64;
        }
        for row in self.rows() {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / self.n_rows as f64).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        (means, stds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(FeatureMatrix::new(2, 2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(FeatureMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        let m = FeatureMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn empty_matrix_is_allowed() {
        let m = FeatureMatrix::new(0, 3, Vec::new()).unwrap();
        assert_eq!(m.n_rows(), 0);
        assert_eq!(m.rows().count(), 0);
    }

    #[test]
    fn stats_handle_constant_columns() {
        let m = FeatureMatrix::new(3, 2, vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0]).unwrap();
        let (means, stds) = m.column_stats();
        assert!((means[0] - 2.0).abs() < 1e-12);
        assert_eq!(means[1], 5.0);
        assert_eq!(stds[1], 1.0); // constant column guarded
    }
}
