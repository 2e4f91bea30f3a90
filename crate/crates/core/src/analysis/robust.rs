//! Robust pairwise correlation of benchmark measures.
//!
//! Outliers are downweighted by their worst-case robust z-score over a set
//! of projection directions (coordinate axes plus seeded point-pair
//! differences), then a weighted Pearson correlation is taken. Coordinates
//! are robustly standardized (median/MAD) before directions are generated,
//! which makes the estimate exactly invariant under positive per-coordinate
//! affine rescaling. Constants: MAD consistency factor 1.4826, weight
//! cutoff 2.4477 (sqrt of the 0.95 chi-square quantile with 2 degrees of
//! freedom), quadratic weights capped at 1 and cut to 0 past twice the
//! cutoff, at most 250 sampled pair directions.

use crate::error::{Error, Result};
use crate::metrics::{registry, MetricVector};
use crate::rng::SplitMix64;

pub const MAD_CONSISTENCY: f64 = 1.4826;
pub const WEIGHT_CUTOFF: f64 = 2.4477;
/// Points whose outlyingness exceeds this multiple of the cutoff get weight
/// zero outright; capped quadratic weights alone leave gross contamination
/// with enough squared-distance mass to drag the correlation.
pub const REJECTION_FACTOR: f64 = 2.0;
pub const MAX_PAIR_DIRECTIONS: usize = 250;

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        (values[m / 2 - 1] + values[m / 2]) / 2.0
    }
}

/// Worst-case robust z-score per point over the given unit directions.
/// Directions whose projected MAD is negligible relative to the projection
/// scale are skipped; if every direction is skipped all scores are 0.
pub fn sd_outlyingness(points: &[(f64, f64)], directions: &[(f64, f64)]) -> Result<Vec<f64>> {
    if points.len() < 3 {
        return Err(Error::Analysis(format!(
            "outlyingness needs at least 3 points, got {}",
            points.len()
        )));
    }
    let mut scores = vec![0.0_f64; points.len()];
    for (ax, ay) in directions {
        let proj: Vec<f64> = points.iter().map(|(x, y)| ax * x + ay * y).collect();
        let center = median_of(proj.clone());
        let scale = proj.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mad = median_of(proj.iter().map(|v| (v - center).abs()).collect());
        if mad < 1e-12 * scale.max(1.0) {
            continue;
        }
        let denom = MAD_CONSISTENCY * mad;
        for (score, p) in scores.iter_mut().zip(&proj) {
            let r = (p - center).abs() / denom;
            if r > *score {
                *score = r;
            }
        }
    }
    Ok(scores)
}

/// Axes plus (up to) MAX_PAIR_DIRECTIONS normalized point-pair differences.
/// All pairs are used when there are few enough; otherwise pairs are sampled
/// with the fixed seeded generator.
fn direction_set(points: &[(f64, f64)], seed: u64) -> Vec<(f64, f64)> {
    fn push(directions: &mut Vec<(f64, f64)>, a: (f64, f64), b: (f64, f64)) -> bool {
        let dx = a.0 - b.0;
        let dy = a.1 - b.1;
        let norm = (dx * dx + dy * dy).sqrt();
        if norm > 0.0 {
            directions.push((dx / norm, dy / norm));
            true
        } else {
            false
        }
    }
    let n = points.len();
    let mut directions = vec![(1.0, 0.0), (0.0, 1.0)];
    let total_pairs = n * (n - 1) / 2;
    if total_pairs <= MAX_PAIR_DIRECTIONS {
        for i in 0..n {
            for j in (i + 1)..n {
                push(&mut directions, points[i], points[j]);
            }
        }
    } else {
        let mut rng = SplitMix64::new(seed);
        let mut added = 0;
        let mut attempts = 0;
        while added < MAX_PAIR_DIRECTIONS && attempts < MAX_PAIR_DIRECTIONS * 20 {
            attempts += 1;
            let i = rng.below(n);
            let j = rng.below(n);
            if i == j {
                continue;
            }
            if push(&mut directions, points[i], points[j]) {
                added += 1;
            }
        }
    }
    directions
}

/// Robustly standardize each coordinate: subtract the median, divide by the
/// MAD (falling back to the max absolute deviation, then 1, for degenerate
/// spreads). Keeps direction generation independent of per-coordinate units.
fn robust_standardize(pairs: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let scale_of = |devs: &[f64]| {
        let mad = median_of(devs.to_vec());
        if mad > 0.0 {
            return mad;
        }
        let max_dev = devs.iter().fold(0.0_f64, |m, v| m.max(*v));
        if max_dev > 0.0 {
            max_dev
        } else {
            1.0
        }
    };
    let med_x = median_of(pairs.iter().map(|(x, _)| *x).collect());
    let med_y = median_of(pairs.iter().map(|(_, y)| *y).collect());
    let dev_x: Vec<f64> = pairs.iter().map(|(x, _)| (x - med_x).abs()).collect();
    let dev_y: Vec<f64> = pairs.iter().map(|(_, y)| (y - med_y).abs()).collect();
    let sx = scale_of(&dev_x);
    let sy = scale_of(&dev_y);
    pairs.iter().map(|(x, y)| ((x - med_x) / sx, (y - med_y) / sy)).collect()
}

/// Outlyingness-weighted correlation of paired measurements, clamped to
/// [-1, 1]. Undefined when either coordinate has zero weighted variance.
pub fn sd_correlation(pairs: &[(f64, f64)], seed: u64) -> Result<Option<f64>> {
    if pairs.len() < 3 {
        return Err(Error::Analysis(format!(
            "robust correlation needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Analysis("non-finite value in correlation input".into()));
    }
    let standardized = robust_standardize(pairs);
    let directions = direction_set(&standardized, seed);
    let scores = sd_outlyingness(&standardized, &directions)?;
    let weights: Vec<f64> = scores
        .iter()
        .map(|r| {
            if *r <= WEIGHT_CUTOFF {
                1.0
            } else if *r > REJECTION_FACTOR * WEIGHT_CUTOFF {
                0.0
            } else {
                let t = WEIGHT_CUTOFF / r;
                t * t
            }
        })
        .collect();
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return Ok(None);
    }
    let mean_x: f64 = pairs.iter().zip(&weights).map(|((x, _), w)| w * x).sum::<f64>() / wsum;
    let mean_y: f64 = pairs.iter().zip(&weights).map(|((_, y), w)| w * y).sum::<f64>() / wsum;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for ((x, y), w) in pairs.iter().zip(&weights) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += w * dx * dy;
        var_x += w * dx * dx;
        var_y += w * dy * dy;
    }
    if var_x <= 0.0 || var_y <= 0.0 {
        return Ok(None);
    }
    Ok(Some((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0)))
}

/// Symmetric robust correlation matrix over the metric registry.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// entries[i][j]; empty cells are metric pairs with too few defined
    /// records or degenerate variance.
    pub entries: Vec<Vec<Option<f64>>>,
}

/// Pairwise robust correlations across records of one dataset-algorithm
/// pair. Undefined metric values are dropped pairwise; pairs left with
/// fewer than 3 records stay empty.
pub fn correlation_matrix(records: &[MetricVector], seed: u64) -> Result<CorrelationMatrix> {
    if records.len() < 3 {
        return Err(Error::Analysis(format!(
            "correlation matrix needs at least 3 records, got {}",
            records.len()
        )));
    }
    let names = registry();
    let k = names.len();
    let mut entries = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let pairs: Vec<(f64, f64)> = records
                .iter()
                .filter_map(|r| match (r.values()[i], r.values()[j]) {
                    (Some(a), Some(b)) => Some((a, b)),
                    _ => None,
                })
                .collect();
            let value = if pairs.len() < 3 {
                None
            } else {
                sd_correlation(&pairs, seed.wrapping_add((i * k + j) as u64))?
            };
            entries[i][j] = value;
            entries[j][i] = value;
        }
    }
    Ok(CorrelationMatrix { names, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pearson(pairs: &[(f64, f64)]) -> f64 {
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|(x, _)| x).sum::<f64>() / n;
        let my = pairs.iter().map(|(_, y)| y).sum::<f64>() / n;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for (x, y) in pairs {
            cov += (x - mx) * (y - my);
            vx += (x - mx) * (x - mx);
            vy += (y - my) * (y - my);
        }
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn centered_point_has_near_zero_outlyingness() {
        // symmetric cloud around (1, 2); the center point projects onto the
        // median in every direction
        let mut points = vec![(1.0, 2.0)];
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.5), (0.0, -1.5), (2.0, 2.0), (-2.0, -2.0)] {
            points.push((1.0 + dx, 2.0 + dy));
        }
        let dirs = direction_set(&points, 1);
        let scores = sd_outlyingness(&points, &dirs).unwrap();
        assert!(scores[0] < 1e-9, "center score {}", scores[0]);
    }

    #[test]
    fn gross_outlier_scores_above_every_inlier() {
        let mut points: Vec<(f64, f64)> = (0..9)
            .map(|i| ((i % 3) as f64 * 0.1, (i / 3) as f64 * 0.1))
            .collect();
        points.push((100.0, 100.0));
        let dirs = direction_set(&points, 2);
        let scores = sd_outlyingness(&points, &dirs).unwrap();
        let outlier = scores[9];
        for (i, s) in scores[..9].iter().enumerate() {
            assert!(outlier > *s, "inlier {i} score {s} >= outlier {outlier}");
        }
    }

    #[test]
    fn identity_series_correlates_perfectly() {
        let pairs: Vec<(f64, f64)> = (0..20).map(|i| (i as f64 * 0.3 + 1.0, i as f64 * 0.3 + 1.0)).collect();
        assert_eq!(sd_correlation(&pairs, 7).unwrap(), Some(1.0));
    }

    #[test]
    fn positive_affine_image_correlates_perfectly() {
        let xs = [0.2, 1.7, -0.4, 3.1, 2.2, 0.9];
        let pairs: Vec<(f64, f64)> = xs.iter().map(|x| (*x, 2.5 * x - 1.0)).collect();
        assert_eq!(sd_correlation(&pairs, 3).unwrap(), Some(1.0));
    }

    #[test]
    fn four_corner_symmetric_set_is_uncorrelated() {
        let pairs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
        assert_eq!(sd_correlation(&pairs, 11).unwrap(), Some(0.0));
    }

    #[test]
    fn symmetric_in_argument_order() {
        let pairs = [(0.3, 1.2), (1.4, 0.2), (2.2, 2.9), (0.7, 1.1), (1.9, 2.4)];
        let swapped: Vec<(f64, f64)> = pairs.iter().map(|(x, y)| (*y, *x)).collect();
        let a = sd_correlation(&pairs, 5).unwrap().unwrap();
        let b = sd_correlation(&swapped, 5).unwrap().unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_positive_rescaling() {
        let pairs = [(0.3, 1.2), (1.4, 0.2), (2.2, 2.9), (0.7, 1.1), (1.9, 2.4), (0.1, 0.4)];
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|(x, y)| (3.0 * x + 5.0, 0.25 * y - 2.0)).collect();
        let a = sd_correlation(&pairs, 9).unwrap().unwrap();
        let b = sd_correlation(&scaled, 9).unwrap().unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn clean_normal_data_tracks_pearson() {
        let mut rng = SplitMix64::new(1234);
        let rho: f64 = 0.8;
        let pairs: Vec<(f64, f64)> = (0..500)
            .map(|_| {
                let a = rng.normal();
                let b = rng.normal();
                (a, rho * a + (1.0 - rho * rho).sqrt() * b)
            })
            .collect();
        let robust = sd_correlation(&pairs, 42).unwrap().unwrap();
        let plain = pearson(&pairs);
        assert!((robust - plain).abs() < 0.1, "robust {robust} pearson {plain}");
    }

    #[test]
    fn outliers_move_pearson_more_than_the_robust_estimate() {
        let mut rng = SplitMix64::new(777);
        let rho: f64 = 0.8;
        let clean: Vec<(f64, f64)> = (0..500)
            .map(|_| {
                let a = rng.normal();
                let b = rng.normal();
                (a, rho * a + (1.0 - rho * rho).sqrt() * b)
            })
            .collect();
        let robust_clean = sd_correlation(&clean, 42).unwrap().unwrap();
        let mut dirty = clean.clone();
        for slot in dirty.iter_mut().take(100) {
            *slot = (10.0, -10.0);
        }
        let robust_dirty = sd_correlation(&dirty, 42).unwrap().unwrap();
        let pearson_dirty = pearson(&dirty);
        let robust_shift = (robust_dirty - robust_clean).abs();
        let pearson_shift = (pearson_dirty - robust_clean).abs();
        assert!(robust_shift <= 0.15, "robust shifted {robust_shift}");
        assert!(pearson_shift > robust_shift, "pearson {pearson_shift} vs robust {robust_shift}");
    }

    #[test]
    fn constant_coordinate_is_undefined() {
        let pairs = [(1.0, 0.2), (1.0, 0.9), (1.0, 0.5), (1.0, 0.1)];
        assert_eq!(sd_correlation(&pairs, 1).unwrap(), None);
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(sd_correlation(&[(0.0, 0.0), (1.0, 1.0)], 1).is_err());
        assert!(sd_outlyingness(&[(0.0, 0.0)], &[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn matrix_is_symmetric_with_unit_diagonal() {
        use crate::metrics::registry;
        let mut rng = SplitMix64::new(3);
        let names = registry();
        let records: Vec<MetricVector> = (0..12)
            .map(|_| {
                let values: Vec<Option<f64>> = names
                    .iter()
                    .enumerate()
                    .map(|(k, _)| Some(rng.normal() + k as f64 * 0.01))
                    .collect();
                MetricVector::from_values(values).unwrap()
            })
            .collect();
        let matrix = correlation_matrix(&records, 5).unwrap();
        let k = matrix.names.len();
        for i in 0..k {
            assert_eq!(matrix.entries[i][i], Some(1.0), "diagonal at {i}");
            for j in 0..k {
                assert_eq!(matrix.entries[i][j], matrix.entries[j][i]);
                if let Some(v) = matrix.entries[i][j] {
                    assert!((-1.0..=1.0).contains(&v));
                }
            }
        }
    }
}
