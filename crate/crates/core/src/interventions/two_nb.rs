//! Two naive Bayes: one Gaussian model per sensitive value with smoothed
//! group-conditional priors, plus a calibration loop that shifts prior mass
//! until the training positive-rate gap between groups closes.

use crate::error::{Error, Result};
use crate::learners::gnb::{GnbModel, VARIANCE_FLOOR};
use crate::matrix::FeatureMatrix;

/// Prior mass moved per calibration round.
pub const CALIBRATION_STEP: f64 = 0.01;
/// Training positive-rate gap below which calibration stops.
pub const CALIBRATION_TOLERANCE: f64 = 0.01;
pub const MAX_CALIBRATION_ROUNDS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoNaiveBayesModel {
    /// Per sensitive value (index = 0/1 code).
    pub group_models: [GnbModel; 2],
    pub prior_smoothing: f64,
    pub calibration_rounds: usize,
}

fn validate_groups(s: &[u8]) -> Result<()> {
    if s.iter().any(|v| *v > 1) {
        return Err(Error::Train("sensitive codes must be 0/1".into()));
    }
    if !s.contains(&0) || !s.contains(&1) {
        return Err(Error::Train("both sensitive groups must be present".into()));
    }
    Ok(())
}

/// Gaussian stats per class for one group, falling back to the pooled class
/// rows when the group is missing a class entirely.
fn group_gaussians(
    x: &FeatureMatrix,
    y: &[u8],
    s: &[u8],
    group: u8,
) -> ([Vec<f64>; 2], [Vec<f64>; 2]) {
    let d = x.n_cols();
    let mut means = [vec![0.0; d], vec![0.0; d]];
    let mut vars = [vec![0.0; d], vec![0.0; d]];
    for class in 0..2u8 {
        let in_group: Vec<usize> = (0..x.n_rows())
            .filter(|&i| y[i] == class && s[i] == group)
            .collect();
        let rows = if in_group.is_empty() {
            (0..x.n_rows()).filter(|&i| y[i] == class).collect()
        } else {
            in_group
        };
        let count = rows.len() as f64;
        let c = class as usize;
        for &i in &rows {
            for (m, v) in means[c].iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for m in &mut means[c] {
            *m /= count;
        }
        for &i in &rows {
            for ((vv, v), m) in vars[c].iter_mut().zip(x.row(i)).zip(&means[c]) {
                *vv += (v - m) * (v - m);
            }
        }
        for vv in &mut vars[c] {
            *vv = (*vv / count).max(VARIANCE_FLOOR);
        }
    }
    (means, vars)
}

impl TwoNaiveBayesModel {
    /// Route each row to its group's model; ties at 0.5 go positive.
    pub fn predict(&self, x: &FeatureMatrix, s: &[u8]) -> Result<Vec<u8>> {
        Ok(self.predict_proba(x, s)?.iter().map(|p| (*p >= 0.5) as u8).collect())
    }

    pub fn predict_proba(&self, x: &FeatureMatrix, s: &[u8]) -> Result<Vec<f64>> {
        if s.len() != x.n_rows() {
            return Err(Error::Predict("sensitive codes do not match row count".into()));
        }
        if s.iter().any(|v| *v > 1) {
            return Err(Error::Predict("sensitive codes must be 0/1".into()));
        }
        // Batch per group, then interleave back.
        let mut out = vec![0.0; x.n_rows()];
        for group in 0..2u8 {
            let rows: Vec<usize> = (0..x.n_rows()).filter(|&i| s[i] == group).collect();
            if rows.is_empty() {
                continue;
            }
            let sub = x.select_rows(&rows)?;
            let probs = self.group_models[group as usize].predict_proba(&sub)?;
            for (&i, p) in rows.iter().zip(&probs) {
                out[i] = *p;
            }
        }
        Ok(out)
    }
}

/// Positive-rate gap P[pred=1 | s=1] - P[pred=1 | s=0].
fn rate_gap(pred: &[u8], s: &[u8]) -> f64 {
    let mut pos = [0usize; 2];
    let mut n = [0usize; 2];
    for (p, &g) in pred.iter().zip(s) {
        n[g as usize] += 1;
        pos[g as usize] += *p as usize;
    }
    pos[1] as f64 / n[1] as f64 - pos[0] as f64 / n[0] as f64
}

fn shift_prior(priors: &mut [f64; 2], from_positive: bool) {
    let delta = CALIBRATION_STEP;
    if from_positive {
        priors[1] -= delta;
        priors[0] += delta;
    } else {
        priors[0] -= delta;
        priors[1] += delta;
    }
    for p in priors.iter_mut() {
        *p = p.max(1e-9);
    }
    let sum = priors[0] + priors[1];
    priors[0] /= sum;
    priors[1] /= sum;
}

/// Fit the two per-group models with additively smoothed priors, then run
/// the calibration loop on the training data.
pub fn fit_two_naive_bayes(
    x: &FeatureMatrix,
    s: &[u8],
    y: &[u8],
    prior_smoothing: f64,
) -> Result<TwoNaiveBayesModel> {
    if y.len() != x.n_rows() || s.len() != x.n_rows() {
        return Err(Error::Train("label or sensitive length mismatch".into()));
    }
    validate_groups(s)?;
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::Train("training labels contain a single class".into()));
    }
    if !(0.0..=1.0).contains(&prior_smoothing) {
        return Err(Error::Train(format!(
            "prior smoothing must lie in [0,1], got {prior_smoothing}"
        )));
    }

    let mut group_models: Vec<GnbModel> = Vec::with_capacity(2);
    for group in 0..2u8 {
        let n_g = s.iter().filter(|&&g| g == group).count() as f64;
        let pos = (0..x.n_rows()).filter(|&i| s[i] == group && y[i] == 1).count() as f64;
        let beta = prior_smoothing;
        let priors = [
            (n_g - pos + beta) / (n_g + 2.0 * beta),
            (pos + beta) / (n_g + 2.0 * beta),
        ];
        let (means, vars) = group_gaussians(x, y, s, group);
        group_models.push(GnbModel { priors, means, variances: vars });
    }
    let mut model = TwoNaiveBayesModel {
        group_models: [group_models.remove(0), group_models.remove(0)],
        prior_smoothing,
        calibration_rounds: 0,
    };

    // Calibration: move prior mass away from (Y=1 | S=1) and toward
    // (Y=1 | S=0) until the training rate gap closes or the round cap hits.
    let mut rounds = 0;
    loop {
        let pred = model.predict(x, s)?;
        let gap = rate_gap(&pred, s);
        if gap <= CALIBRATION_TOLERANCE || rounds >= MAX_CALIBRATION_ROUNDS {
            break;
        }
        shift_prior(&mut model.group_models[1].priors, true);
        shift_prior(&mut model.group_models[0].priors, false);
        rounds += 1;
    }
    model.calibration_rounds = rounds;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Biased two-group data: group 1 mostly positive, group 0 mostly not,
    /// with features tracking the label inside each group.
    fn biased_data(n: usize, seed: u64) -> (FeatureMatrix, Vec<u8>, Vec<u8>) {
        let mut rng = SplitMix64::new(seed);
        let mut rows = Vec::new();
        let mut s = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let group = rng.bernoulli(0.5) as u8;
            let p_pos = if group == 1 { 0.7 } else { 0.3 };
            let label = rng.bernoulli(p_pos) as u8;
            let sign = 2.0 * label as f64 - 1.0;
            rows.push(vec![sign + rng.normal(), 0.5 * sign + rng.normal()]);
            s.push(group);
            y.push(label);
        }
        (FeatureMatrix::from_rows(&rows).unwrap(), s, y)
    }

    #[test]
    fn calibration_closes_a_wide_gap() {
        let (x, s, y) = biased_data(2000, 3);
        // the uncalibrated per-group model shows the bias
        let raw = {
            let mut m = fit_two_naive_bayes(&x, &s, &y, 0.1).unwrap();
            // undo calibration by refitting priors from counts
            for group in 0..2u8 {
                let n_g = s.iter().filter(|&&g| g == group).count() as f64;
                let pos =
                    (0..y.len()).filter(|&i| s[i] == group && y[i] == 1).count() as f64;
                m.group_models[group as usize].priors =
                    [(n_g - pos + 0.1) / (n_g + 0.2), (pos + 0.1) / (n_g + 0.2)];
            }
            m
        };
        let before = rate_gap(&raw.predict(&x, &s).unwrap(), &s);
        assert!(before >= 0.3, "construction should start biased, gap {before}");

        for beta in [0.0, 0.3, 1.0] {
            let model = fit_two_naive_bayes(&x, &s, &y, beta).unwrap();
            let after = rate_gap(&model.predict(&x, &s).unwrap(), &s);
            assert!(after <= 0.05, "beta {beta}: calibrated gap {after}");
        }
    }

    #[test]
    fn already_fair_data_needs_no_calibration() {
        let mut rng = SplitMix64::new(9);
        let mut rows = Vec::new();
        let mut s = Vec::new();
        let mut y = Vec::new();
        // identical class structure in both groups
        for i in 0..400 {
            let label = (i % 2) as u8;
            rows.push(vec![2.0 * label as f64 - 1.0 + 0.1 * rng.normal()]);
            s.push(((i / 2) % 2) as u8);
            y.push(label);
        }
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let model = fit_two_naive_bayes(&x, &s, &y, 0.2).unwrap();
        assert_eq!(model.calibration_rounds, 0);
        // equals the plain per-group smoothed model: priors unchanged
        for group in 0..2u8 {
            let n_g = s.iter().filter(|&&g| g == group).count() as f64;
            let pos = (0..y.len()).filter(|&i| s[i] == group && y[i] == 1).count() as f64;
            let expect = [(n_g - pos + 0.2) / (n_g + 0.4), (pos + 0.2) / (n_g + 0.4)];
            let got = model.group_models[group as usize].priors;
            assert!((got[0] - expect[0]).abs() < 1e-12);
            assert!((got[1] - expect[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_groups() {
        let x = FeatureMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(fit_two_naive_bayes(&x, &[0, 0, 0], &[0, 1, 0], 0.1).is_err());
        assert!(fit_two_naive_bayes(&x, &[0, 1, 2], &[0, 1, 0], 0.1).is_err());
        assert!(fit_two_naive_bayes(&x, &[0, 1, 0], &[1, 1, 1], 0.1).is_err());
    }

    #[test]
    fn missing_group_class_falls_back_to_pooled_stats() {
        // group 1 has no negatives; the fit must still succeed
        let x = FeatureMatrix::from_rows(&[
            vec![0.0], vec![0.2], vec![1.0], vec![1.2], vec![0.9],
        ])
        .unwrap();
        let s = vec![0, 0, 1, 1, 1];
        let y = vec![0, 0, 1, 1, 1];
        let model = fit_two_naive_bayes(&x, &s, &y, 0.5).unwrap();
        let pred = model.predict(&x, &s).unwrap();
        assert_eq!(pred.len(), 5);
    }
}
