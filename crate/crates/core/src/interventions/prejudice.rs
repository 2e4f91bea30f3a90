//! Fairness-regularized logistic regression with one weight vector per
//! sensitive group. The regularizer charges the model for how much the
//! predicted-outcome distribution within a group diverges from the overall
//! one, steering the two group models toward group-independent predictions.

use crate::error::{Error, Result};
use crate::learners::logreg::sigmoid;
use crate::learners::optim::gradient_descent;
use crate::matrix::FeatureMatrix;

pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PrejudiceRemoverModel {
    /// Per-group weights, intercept last (length d + 1 each).
    pub weights: [Vec<f64>; 2],
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Strength of the fairness regularizer.
    pub fairness_weight: f64,
}

impl PrejudiceRemoverModel {
    pub fn feature_count(&self) -> usize {
        self.means.len()
    }

    pub fn predict_proba(&self, x: &FeatureMatrix, s: &[u8]) -> Result<Vec<f64>> {
        if x.n_cols() != self.feature_count() {
            return Err(Error::Predict(format!(
                "expected {} features, got {}",
                self.feature_count(),
                x.n_cols()
            )));
        }
        if s.len() != x.n_rows() || s.iter().any(|v| *v > 1) {
            return Err(Error::Predict("sensitive codes must be 0/1 per row".into()));
        }
        let d = self.feature_count();
        Ok(x.rows()
            .zip(s)
            .map(|(row, &g)| {
                let w = &self.weights[g as usize];
                let mut z = w[d];
                for i in 0..d {
                    z += w[i] * (row[i] - self.means[i]) / self.stds[i];
                }
                sigmoid(z)
            })
            .collect())
    }

    pub fn predict(&self, x: &FeatureMatrix, s: &[u8]) -> Result<Vec<u8>> {
        Ok(self.predict_proba(x, s)?.iter().map(|p| (*p >= 0.5) as u8).collect())
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(1e-12, 1.0 - 1e-12)
}

/// Full objective and gradient at stacked weights `w` = [w_group0, w_group1],
/// each of length d + 1 with the intercept last.
///
/// Objective: negative log-likelihood + eta * R + (l2/2) * (feature-weight
/// norms), where R sums, over rows, the log-ratio between the model's
/// within-group outcome distribution and its overall outcome distribution,
/// weighted by the row's predicted outcome probabilities.
pub fn objective_and_gradient(
    rows: &[Vec<f64>],
    s: &[u8],
    y: &[u8],
    eta: f64,
    l2: f64,
    w: &[f64],
) -> (f64, Vec<f64>) {
    let n = rows.len();
    let d = rows[0].len();
    debug_assert_eq!(w.len(), 2 * (d + 1));

    let mut p = vec![0.0; n];
    let mut nll = 0.0;
    for i in 0..n {
        let base = (s[i] as usize) * (d + 1);
        let mut z = w[base + d];
        for j in 0..d {
            z += w[base + j] * rows[i][j];
        }
        p[i] = sigmoid(z);
        nll += softplus(z) - y[i] as f64 * z;
    }

    // Group and overall means of the predicted positive probability.
    let mut group_sum = [0.0; 2];
    let mut group_n = [0usize; 2];
    for i in 0..n {
        group_sum[s[i] as usize] += p[i];
        group_n[s[i] as usize] += 1;
    }
    let q_overall = clamp_prob(p.iter().sum::<f64>() / n as f64);
    let q_group = [
        clamp_prob(if group_n[0] > 0 { group_sum[0] / group_n[0] as f64 } else { q_overall }),
        clamp_prob(if group_n[1] > 0 { group_sum[1] / group_n[1] as f64 } else { q_overall }),
    ];

    let mut fairness = 0.0;
    for i in 0..n {
        let qg = q_group[s[i] as usize];
        fairness += p[i] * (qg / q_overall).ln()
            + (1.0 - p[i]) * ((1.0 - qg) / (1.0 - q_overall)).ln();
    }

    let mut objective = nll + eta * fairness;
    let mut grad = vec![0.0; w.len()];

    // d fairness / d p_i reduces to the group log-odds gap because the
    // indirect terms through the group and overall means cancel exactly.
    let log_gap = [
        (q_group[0] * (1.0 - q_overall) / (q_overall * (1.0 - q_group[0]))).ln(),
        (q_group[1] * (1.0 - q_overall) / (q_overall * (1.0 - q_group[1]))).ln(),
    ];
    for i in 0..n {
        let g = s[i] as usize;
        let base = g * (d + 1);
        let coef = (p[i] - y[i] as f64) + eta * log_gap[g] * p[i] * (1.0 - p[i]);
        for j in 0..d {
            grad[base + j] += coef * rows[i][j];
        }
        grad[base + d] += coef;
    }
    for g in 0..2 {
        let base = g * (d + 1);
        for j in 0..d {
            objective += 0.5 * l2 * w[base + j] * w[base + j];
            grad[base + j] += l2 * w[base + j];
        }
    }
    (objective, grad)
}

/// Fit per-group logistic models under the fairness regularizer with
/// strength `eta` and L2 penalty `l2` (intercepts unpenalized).
pub fn fit_prejudice_remover(
    x: &FeatureMatrix,
    s: &[u8],
    y: &[u8],
    eta: f64,
    l2: f64,
) -> Result<PrejudiceRemoverModel> {
    if y.len() != x.n_rows() || s.len() != x.n_rows() {
        return Err(Error::Train("label or sensitive length mismatch".into()));
    }
    if s.iter().any(|v| *v > 1) {
        return Err(Error::Train("sensitive codes must be 0/1".into()));
    }
    if !s.contains(&0) || !s.contains(&1) {
        return Err(Error::Train("both sensitive groups must be present".into()));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::Train("training labels contain a single class".into()));
    }
    if eta < 0.0 {
        return Err(Error::Train("fairness weight must be non-negative".into()));
    }
    let (means, stds) = x.column_stats();
    let rows: Vec<Vec<f64>> = x
        .rows()
        .map(|row| {
            row.iter()
                .zip(&means)
                .zip(&stds)
                .map(|((v, m), sd)| (v - m) / sd)
                .collect()
        })
        .collect();
    let d = x.n_cols();
    let w0 = vec![0.0; 2 * (d + 1)];
    let result = gradient_descent(w0, DEFAULT_TOL, DEFAULT_MAX_ITER, |w| {
        objective_and_gradient(&rows, s, y, eta, l2, w)
    });
    let weights0 = result.x[..d + 1].to_vec();
    let weights1 = result.x[d + 1..].to_vec();
    Ok(PrejudiceRemoverModel {
        weights: [weights0, weights1],
        means,
        stds,
        fairness_weight: eta,
    })
}
