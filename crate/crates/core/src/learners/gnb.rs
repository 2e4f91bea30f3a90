//! Gaussian naive Bayes with per-class feature means/variances and a
//! variance floor so constant features stay uninformative.

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GnbModel {
    /// Class priors for y = 0 and y = 1.
    pub priors: [f64; 2],
    /// Per-class per-feature means.
    pub means: [Vec<f64>; 2],
    /// Per-class per-feature variances, floored at [`VARIANCE_FLOOR`].
    pub variances: [Vec<f64>; 2],
}

impl GnbModel {
    pub fn feature_count(&self) -> usize {
        self.means[0].len()
    }

    /// Fit on rows of `x` with binary labels; both classes must appear.
    pub fn fit(x: &FeatureMatrix, y: &[u8]) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(Error::Train(format!(
                "label count {} does not match {} rows",
                y.len(),
                x.n_rows()
            )));
        }
        let counts = [
            y.iter().filter(|&&v| v == 0).count(),
            y.iter().filter(|&&v| v == 1).count(),
        ];
        if counts[0] == 0 || counts[1] == 0 {
            return Err(Error::Train("training labels contain a single class".into()));
        }
        let d = x.n_cols();
        let n = x.n_rows() as f64;
        let mut means = [vec![0.0; d], vec![0.0; d]];
        for (row, &label) in x.rows().zip(y) {
            let m = &mut means[label as usize];
            for (mi, v) in m.iter_mut().zip(row) {
                *mi += v;
            }
        }
        for c in 0..2 {
            for mi in &mut means[c] {
                *mi /= counts[c] as f64;
            }
        }
        let mut variances = [vec![0.0; d], vec![0.0; d]];
        for (row, &label) in x.rows().zip(y) {
            let c = label as usize;
            for ((vi, v), m) in variances[c].iter_mut().zip(row).zip(&means[c]) {
                *vi += (v - m) * (v - m);
            }
        }
        for c in 0..2 {
            for vi in &mut variances[c] {
                *vi = (*vi / counts[c] as f64).max(VARIANCE_FLOOR);
            }
        }
        Ok(GnbModel {
            priors: [counts[0] as f64 / n, counts[1] as f64 / n],
            means,
            variances,
        })
    }

    fn class_log_likelihood(&self, row: &[f64], c: usize) -> f64 {
        let mut ll = self.priors[c].max(f64::MIN_POSITIVE).ln();
        for ((v, m), var) in row.iter().zip(&self.means[c]).zip(&self.variances[c]) {
            ll += -0.5 * (std::f64::consts::TAU * var).ln() - (v - m) * (v - m) / (2.0 * var);
        }
        ll
    }

    /// Posterior probability of the positive class per row.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.feature_count() {
            return Err(Error::Predict(format!(
                "expected {} features, got {}",
                self.feature_count(),
                x.n_cols()
            )));
        }
        Ok(x.rows()
            .map(|row| {
                let l0 = self.class_log_likelihood(row, 0);
                let l1 = self.class_log_likelihood(row, 1);
                // p1 = exp(l1) / (exp(l0) + exp(l1)); computed stably
                1.0 / (1.0 + (l0 - l1).exp())
            })
            .collect())
    }
}
