//! Covariance-constrained logistic regression: accuracy is maximized subject
//! to a bound on the empirical covariance between the sensitive attribute
//! and the decision score, solved by projected gradient descent onto the
//! slab { theta : |v . theta| <= c }.

use crate::error::{Error, Result};
use crate::learners::logreg::{self, sigmoid, LinearModel};
use crate::learners::optim::projected_gradient_descent;
use crate::matrix::FeatureMatrix;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ZafarModel {
    /// Constrained weights in the model's standardized coordinates.
    pub model: LinearModel,
    /// Covariance direction v (intercept entry fixed at 0).
    pub covariance_direction: Vec<f64>,
    /// Active covariance bound c.
    pub bound: f64,
    pub constraint_multiplier: f64,
    /// Set when v = 0 made the constraint vacuous and the unconstrained fit
    /// was returned unchanged.
    pub constraint_vacuous: bool,
}

impl ZafarModel {
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        Ok(self.model.scores(x)?.iter().map(|z| (sigmoid(*z) >= 0.5) as u8).collect())
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self.model.scores(x)?.iter().map(|z| sigmoid(*z)).collect())
    }

    /// |v . theta| actually achieved by the fitted weights.
    pub fn achieved_covariance(&self) -> f64 {
        dot(&self.covariance_direction, &self.model.weights).abs()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean projection onto { theta : |v . theta| <= c }. Identity inside
/// the slab; otherwise moves along v to the nearest face.
pub fn slab_projection(theta: &[f64], v: &[f64], c: f64) -> Vec<f64> {
    let a = dot(v, theta);
    if a.abs() <= c {
        return theta.to_vec();
    }
    let vv = dot(v, v);
    let target = if a > 0.0 { c } else { -c };
    let scale = (a - target) / vv;
    theta.iter().zip(v).map(|(t, vi)| t - scale * vi).collect()
}

/// Fit the constrained model. The bound is `c_multiplier` times the
/// covariance the unconstrained fit achieves, so multiplier 1 leaves the
/// unconstrained optimum feasible and multiplier 0.001 nearly removes the
/// score's dependence on the sensitive attribute.
pub fn fit_zafar(
    x: &FeatureMatrix,
    s: &[u8],
    y: &[u8],
    c_multiplier: f64,
    l2: f64,
) -> Result<ZafarModel> {
    if y.len() != x.n_rows() || s.len() != x.n_rows() {
        return Err(Error::Train("label or sensitive length mismatch".into()));
    }
    if s.iter().any(|v| *v > 1) {
        return Err(Error::Train("sensitive codes must be 0/1".into()));
    }
    if !s.contains(&0) || !s.contains(&1) {
        return Err(Error::Train("both sensitive groups must be present".into()));
    }
    if c_multiplier <= 0.0 {
        return Err(Error::Train("constraint multiplier must be positive".into()));
    }

    // Unconstrained fit first: it standardizes internally and its covariance
    // with s calibrates the bound.
    let unconstrained = logreg::fit(x, y, l2, DEFAULT_TOL, DEFAULT_MAX_ITER, true)?;
    let means = unconstrained.means.clone();
    let stds = unconstrained.stds.clone();
    let d = x.n_cols();
    let rows: Vec<Vec<f64>> = x
        .rows()
        .map(|row| {
            row.iter().zip(&means).zip(&stds).map(|((v, m), sd)| (v - m) / sd).collect()
        })
        .collect();

    // v_k = mean over rows of (s_i - s_bar) * x_ik in standardized
    // coordinates; the constant term contributes exactly zero.
    let n = x.n_rows() as f64;
    let s_bar = s.iter().map(|&v| v as f64).sum::<f64>() / n;
    let mut v = vec![0.0; d + 1];
    for (row, &si) in rows.iter().zip(s) {
        let w = si as f64 - s_bar;
        for (vk, xk) in v.iter_mut().zip(row) {
            *vk += w * xk;
        }
    }
    for vk in v.iter_mut() {
        *vk /= n;
    }
    v[d] = 0.0;

    let v_norm = dot(&v, &v).sqrt();
    if v_norm < 1e-12 {
        return Ok(ZafarModel {
            model: unconstrained,
            covariance_direction: v,
            bound: f64::INFINITY,
            constraint_multiplier: c_multiplier,
            constraint_vacuous: true,
        });
    }

    let unconstrained_cov = dot(&v, &unconstrained.weights).abs();
    let bound = c_multiplier * unconstrained_cov;

    let v_for_proj = v.clone();
    let result = projected_gradient_descent(
        unconstrained.weights.clone(),
        DEFAULT_TOL,
        DEFAULT_MAX_ITER,
        |w| logreg::objective_and_gradient(&rows, y, l2, w),
        move |w| slab_projection(w, &v_for_proj, bound),
    );

    Ok(ZafarModel {
        model: LinearModel { weights: result.x, means, stds },
        covariance_direction: v,
        bound,
        constraint_multiplier: c_multiplier,
        constraint_vacuous: false,
    })
}
