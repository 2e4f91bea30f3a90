//! Split-matched comparisons across preprocessing variants and metric
//! tradeoff point sets.

use crate::error::{Error, Result};
use crate::metrics::MetricVector;

/// One split's value under two preprocessing choices.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedPoint {
    pub split_id: usize,
    pub a: f64,
    pub b: f64,
}

/// Match records of the same splits across two variants and extract one
/// metric from each side. Splits where the metric is undefined on either
/// side are skipped.
pub fn variant_compare(
    records_a: &[(usize, MetricVector)],
    records_b: &[(usize, MetricVector)],
    metric: &str,
) -> Result<Vec<PairedPoint>> {
    let mut splits_a: Vec<usize> = records_a.iter().map(|(s, _)| *s).collect();
    let mut splits_b: Vec<usize> = records_b.iter().map(|(s, _)| *s).collect();
    splits_a.sort_unstable();
    splits_b.sort_unstable();
    if splits_a != splits_b {
        return Err(Error::Analysis(
            "variant comparison requires the same split ids on both sides".into(),
        ));
    }
    let mut out = Vec::new();
    for (split_id, va) in records_a {
        let vb = records_b
            .iter()
            .find(|(s, _)| s == split_id)
            .map(|(_, v)| v)
            .expect("split sets already matched");
        if let (Some(a), Some(b)) = (va.get(metric), vb.get(metric)) {
            out.push(PairedPoint { split_id: *split_id, a, b });
        }
    }
    Ok(out)
}

/// One run's position in a two-measure tradeoff plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub run_id: String,
    pub x: f64,
    pub y: f64,
}

/// Project records onto (x_metric, y_metric), keeping only runs where both
/// are defined.
pub fn tradeoff_points(
    records: &[(String, MetricVector)],
    x_metric: &str,
    y_metric: &str,
) -> Vec<TradeoffPoint> {
    records
        .iter()
        .filter_map(|(run_id, v)| match (v.get(x_metric), v.get(y_metric)) {
            (Some(x), Some(y)) => Some(TradeoffPoint { run_id: run_id.clone(), x, y }),
            _ => None,
        })
        .collect()
}
