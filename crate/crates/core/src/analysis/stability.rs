//! Spread of each measure across repeated random splits.

use crate::metrics::{registry, MetricVector};

/// Mean and sample standard deviation of one (algorithm, metric) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySummary {
    pub algorithm: String,
    pub metric: String,
    /// Mean over splits where the metric was defined; empty when never defined.
    pub mean: Option<f64>,
    /// Sample (n-1) standard deviation; empty when fewer than 2 defined values.
    pub std: Option<f64>,
    /// Number of defined values that went into the mean.
    pub n: usize,
}

/// Summarize per-split metric vectors into one row per (algorithm, metric).
/// Undefined values are skipped and the surviving count reported.
pub fn stability(records: &[(String, MetricVector)]) -> Vec<StabilitySummary> {
    let names = registry();
    let mut algorithms: Vec<&str> = Vec::new();
    for (alg, _) in records {
        if !algorithms.contains(&alg.as_str()) {
            algorithms.push(alg);
        }
    }
    let mut out = Vec::with_capacity(algorithms.len() * names.len());
    for alg in algorithms {
        for (mi, metric) in names.iter().enumerate() {
            let values: Vec<f64> = records
                .iter()
                .filter(|(a, _)| a == alg)
                .filter_map(|(_, v)| v.values()[mi])
                .collect();
            let n = values.len();
            let mean = if n > 0 { Some(values.iter().sum::<f64>() / n as f64) } else { None };
            let std = if n >= 2 {
                let m = mean.unwrap();
                let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
                Some((ss / (n as f64 - 1.0)).sqrt())
            } else {
                None
            };
            out.push(StabilitySummary {
                algorithm: alg.to_string(),
                metric: metric.clone(),
                mean,
                std,
                n,
            });
        }
    }
    out
}
