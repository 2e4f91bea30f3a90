//! Linear SVM: hinge loss plus L2 penalty, minimized by deterministic
//! full-batch subgradient epochs with a 1/(lambda * t) step schedule.

use crate::error::{Error, Result};
use crate::learners::logreg::LinearModel;
use crate::matrix::FeatureMatrix;

pub const DEFAULT_L2: f64 = 1e-3;
pub const DEFAULT_EPOCHS: usize = 500;

pub fn fit(
    x: &FeatureMatrix,
    y: &[u8],
    l2: f64,
    epochs: usize,
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
    if l2 <= 0.0 {
        return Err(Error::Train("svm l2 strength must be positive".into()));
    }
    let (means, stds) = if standardize {
        x.column_stats()
    } else {
        (vec![0.0; x.n_cols()], vec![1.0; x.n_cols()])
    };
    let rows: Vec<Vec<f64>> = x
        .rows()
        .map(|row| {
            row.iter()
                .zip(&means)
                .zip(&stds)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect();
    let signs: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();

    let d = x.n_cols();
    let n = x.n_rows() as f64;
    let mut w = vec![0.0; d + 1]; // intercept last, unpenalized
    for t in 0..epochs {
        let mut grad = vec![0.0; d + 1];
        for i in 0..d {
            grad[i] = l2 * w[i];
        }
        for (row, sign) in rows.iter().zip(&signs) {
            let mut z = w[d];
            for i in 0..d {
                z += w[i] * row[i];
            }
            if sign * z < 1.0 {
                for i in 0..d {
                    grad[i] -= sign * row[i] / n;
                }
                grad[d] -= sign / n;
            }
        }
        let step = 1.0 / (l2 * (t as f64 + 1.0));
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= step * gi;
        }
    }
    Ok(LinearModel { weights: w, means, stds })
}
