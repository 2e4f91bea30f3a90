//! L2-regularized logistic regression trained by full-batch gradient
//! descent with backtracking line search.

use crate::error::{Error, Result};
use crate::learners::optim::gradient_descent;
use crate::matrix::FeatureMatrix;

pub const DEFAULT_L2: f64 = 1e-4;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 5000;

/// A linear decision function over internally standardized inputs.
/// The intercept is an implicit appended 1-column, excluded from the penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// Feature weights followed by the intercept (length d + 1).
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl LinearModel {
    pub fn feature_count(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        let d = self.feature_count();
        let mut z = self.weights[d];
        for i in 0..d {
            z += self.weights[i] * (row[i] - self.means[i]) / self.stds[i];
        }
        z
    }

    pub fn scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.feature_count() {
            return Err(Error::Predict(format!(
                "expected {} features, got {}",
                self.feature_count(),
                x.n_cols()
            )));
        }
        Ok(x.rows().map(|r| self.score(r)).collect())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + exp(z)) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Regularized negative log-likelihood and its gradient at `w`.
///
/// `x` rows are used as-is (standardization happens before this is called);
/// `w` has the intercept last and the penalty skips it.
pub fn objective_and_gradient(
    rows: &[Vec<f64>],
    y: &[u8],
    l2: f64,
    w: &[f64],
) -> (f64, Vec<f64>) {
    let d = w.len() - 1;
    let mut obj = 0.0;
    let mut grad = vec![0.0; w.len()];
    for (row, &label) in rows.iter().zip(y) {
        let mut z = w[d];
        for i in 0..d {
            z += w[i] * row[i];
        }
        let yi = label as f64;
        obj += softplus(z) - yi * z;
        let r = sigmoid(z) - yi;
        for i in 0..d {
            grad[i] += r * row[i];
        }
        grad[d] += r;
    }
    for i in 0..d {
        obj += 0.5 * l2 * w[i] * w[i];
        grad[i] += l2 * w[i];
    }
    (obj, grad)
}

fn standardized_rows(x: &FeatureMatrix, means: &[f64], stds: &[f64]) -> Vec<Vec<f64>> {
    x.rows()
        .map(|row| {
            row.iter()
                .zip(means)
                .zip(stds)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect()
}

/// Fit a logistic regression; `standardize` controls internal feature scaling.
pub fn fit(
    x: &FeatureMatrix,
    y: &[u8],
    l2: f64,
    tol: f64,
    max_iter: usize,
    standardize: bool,
) -> Result<LinearModel> {
    if y.len() != x.n_rows() {
        return Err(Error::Train(format!(
            "label count {} does not match {} rows",
            y.len(),
            x.n_rows()
        )));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::Train("training labels contain a single class".into()));
    }
    if l2 < 0.0 {
        return Err(Error::Train("l2 strength must be non-negative".into()));
    }
    let (means, stds) = if standardize {
        x.column_stats()
    } else {
        (vec![0.0; x.n_cols()], vec![1.0; x.n_cols()])
    };
    let rows = standardized_rows(x, &means, &stds);
    let w0 = vec![0.0; x.n_cols() + 1];
    let result = gradient_descent(w0, tol, max_iter, |w| objective_and_gradient(&rows, y, l2, w));
    Ok(LinearModel { weights: result.x, means, stds })
}
