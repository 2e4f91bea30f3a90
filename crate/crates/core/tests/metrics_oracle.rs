//! Independent from-definition recomputation of every registry measure,
//! checked against the library on randomized prediction sets.
//!
//! The oracle works directly on (y_true, y_pred, s) triples with conditional
//! counting and never touches the library's sufficient statistics, so the two
//! paths share nothing but the definitions.

use fairbench_core::metrics::{full_metric_vector, registry, PredictionSet};
use fairbench_core::rng::SplitMix64;

type Row = (u8, u8, usize);

/// P[event | cond] by direct counting; undefined when nothing satisfies cond.
fn prob(rows: &[Row], cond: impl Fn(&Row) -> bool, event: impl Fn(&Row) -> bool) -> Option<f64> {
    let den = rows.iter().filter(|r| cond(r)).count();
    if den == 0 {
        return None;
    }
    let num = rows.iter().filter(|r| cond(r) && event(r)).count();
    Some(num as f64 / den as f64)
}

/// Accuracy-family measure restricted to rows satisfying `cond`.
fn base_measure(rows: &[Row], name: &str, cond: &dyn Fn(&Row) -> bool) -> Option<f64> {
    match name {
        "acc" => prob(rows, cond, |r| r.0 == r.1),
        "tpr" => prob(rows, |r| cond(r) && r.0 == 1, |r| r.1 == 1),
        "tnr" => prob(rows, |r| cond(r) && r.0 == 0, |r| r.1 == 0),
        "bcr" => {
            let tpr = prob(rows, |r| cond(r) && r.0 == 1, |r| r.1 == 1)?;
            let tnr = prob(rows, |r| cond(r) && r.0 == 0, |r| r.1 == 0)?;
            Some((tpr + tnr) / 2.0)
        }
        _ => unreachable!(),
    }
}

fn calib_measure(rows: &[Row], branch: &str, group: usize) -> Option<f64> {
    match branch {
        "pos" => prob(rows, |r| r.1 == 1 && r.2 == group, |r| r.0 == 1),
        "neg" => prob(rows, |r| r.1 == 0 && r.2 == group, |r| r.0 == 1),
        _ => unreachable!(),
    }
}

fn mean(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    for v in values {
        sum += (*v)?;
    }
    Some(sum / values.len() as f64)
}

/// Recompute one registry metric from scratch.
fn oracle_metric(rows: &[Row], n_groups: usize, privileged: usize, name: &str) -> Option<f64> {
    let everyone = |_: &Row| true;
    let positive_rate = |cond: &dyn Fn(&Row) -> bool| prob(rows, cond, |r| r.1 == 1);
    let unprivileged: Vec<usize> = (0..n_groups).filter(|g| *g != privileged).collect();
    let has_unpriv_rows = rows.iter().any(|r| r.2 != privileged);

    match name {
        "acc" | "tpr" | "tnr" | "bcr" => base_measure(rows, name, &everyone),
        "di_bin" | "di_avg" => {
            let rp = positive_rate(&|r: &Row| r.2 == privileged)?;
            if rp == 0.0 {
                return None;
            }
            if name == "di_bin" {
                if !has_unpriv_rows {
                    return None;
                }
                Some(positive_rate(&|r: &Row| r.2 != privileged)? / rp)
            } else {
                let per: Vec<Option<f64>> = unprivileged
                    .iter()
                    .map(|&g| positive_rate(&move |r: &Row| r.2 == g).map(|rg| rg / rp))
                    .collect();
                mean(&per)
            }
        }
        "cv_bin" | "cv_avg" => {
            let rp = positive_rate(&|r: &Row| r.2 == privileged)?;
            if name == "cv_bin" {
                if !has_unpriv_rows {
                    return None;
                }
                Some(1.0 - (rp - positive_rate(&|r: &Row| r.2 != privileged)?))
            } else {
                let per: Vec<Option<f64>> = unprivileged
                    .iter()
                    .map(|&g| positive_rate(&move |r: &Row| r.2 == g).map(|rg| 1.0 - (rp - rg)))
                    .collect();
                mean(&per)
            }
        }
        _ if name.starts_with("calib_") => {
            // calib_<branch>_<agg>
            let parts: Vec<&str> = name.split('_').collect();
            let (branch, agg) = (parts[1], parts[2]);
            match agg {
                "mean" => {
                    let per: Vec<Option<f64>> =
                        (0..n_groups).map(|g| calib_measure(rows, branch, g)).collect();
                    mean(&per)
                }
                "ratio" => {
                    let fp = calib_measure(rows, branch, privileged)?;
                    if fp == 0.0 {
                        return None;
                    }
                    let per: Vec<Option<f64>> = unprivileged
                        .iter()
                        .map(|&g| calib_measure(rows, branch, g).map(|f| f / fp))
                        .collect();
                    mean(&per)
                }
                "diff" => {
                    let fp = calib_measure(rows, branch, privileged)?;
                    let per: Vec<Option<f64>> = unprivileged
                        .iter()
                        .map(|&g| calib_measure(rows, branch, g).map(|f| 1.0 - (fp - f)))
                        .collect();
                    mean(&per)
                }
                _ => unreachable!(),
            }
        }
        _ => {
            // <base>_<agg>_<grouping>
            let parts: Vec<&str> = name.split('_').collect();
            let (base, agg, grouping) = (parts[0], parts[1], parts[2]);
            let f_priv = base_measure(rows, base, &|r: &Row| r.2 == privileged);
            let unpriv_values: Vec<Option<f64>> = if grouping == "bin" {
                if !has_unpriv_rows {
                    return None;
                }
                vec![base_measure(rows, base, &|r: &Row| r.2 != privileged)]
            } else {
                unprivileged
                    .iter()
                    .map(|&g| base_measure(rows, base, &move |r: &Row| r.2 == g))
                    .collect()
            };
            match agg {
                "mean" => {
                    let mut all = vec![f_priv];
                    all.extend(unpriv_values);
                    mean(&all)
                }
                "ratio" => {
                    let fp = f_priv?;
                    if fp == 0.0 {
                        return None;
                    }
                    let per: Vec<Option<f64>> =
                        unpriv_values.iter().map(|v| v.map(|f| f / fp)).collect();
                    mean(&per)
                }
                "diff" => {
                    let fp = f_priv?;
                    let per: Vec<Option<f64>> =
                        unpriv_values.iter().map(|v| v.map(|f| 1.0 - (fp - f))).collect();
                    mean(&per)
                }
                _ => unreachable!(),
            }
        }
    }
}

fn random_prediction_set(rng: &mut SplitMix64) -> (PredictionSet, Vec<Row>, usize, usize) {
    let n = 1 + rng.below(50);
    let n_groups = 1 + rng.below(4);
    let names: Vec<String> = (0..n_groups).map(|g| format!("g{g}")).collect();
    let mut y_true = Vec::with_capacity(n);
    let mut y_pred = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for i in 0..n {
        y_true.push(rng.below(2) as u8);
        y_pred.push(rng.below(2) as u8);
        // force the privileged group to appear
        groups.push(if i == 0 { 0 } else { rng.below(n_groups) });
    }
    let s: Vec<&str> = groups.iter().map(|&g| names[g].as_str()).collect();
    let p = PredictionSet::new(y_true.clone(), y_pred.clone(), &s, "g0").unwrap();
    // Group ids used by the oracle are re-derived in first-appearance order to
    // mirror the library's naming, but the oracle sees only raw triples.
    let mut seen: Vec<usize> = Vec::new();
    let mut remap = vec![usize::MAX; n_groups];
    for &g in &groups {
        if remap[g] == usize::MAX {
            remap[g] = seen.len();
            seen.push(g);
        }
    }
    let rows: Vec<Row> = y_true
        .iter()
        .zip(&y_pred)
        .zip(&groups)
        .map(|((t, p), g)| (*t, *p, remap[*g]))
        .collect();
    (p, rows, seen.len(), 0)
}

#[test]
fn library_matches_oracle_on_1000_random_sets() {
    let started = std::time::Instant::now();
    let names = registry();
    let mut rng = SplitMix64::new(0xFA1B);
    for case in 0..1000 {
        let (p, rows, n_groups, privileged) = random_prediction_set(&mut rng);
        let vector = full_metric_vector(&p);
        for (name, lib) in names.iter().zip(vector.values()) {
            let expected = oracle_metric(&rows, n_groups, privileged, name);
            match (lib, expected) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    assert!(
                        (a - b).abs() <= 1e-12,
                        "case {case} metric {name}: library {a} vs oracle {b}"
                    );
                }
                (a, b) => panic!("case {case} metric {name}: library {a:?} vs oracle {b:?}"),
            }
        }
    }
    assert!(started.elapsed().as_secs() < 10, "oracle sweep too slow");
}

#[test]
fn metrics_invariant_under_row_permutation() {
    let mut rng = SplitMix64::new(77);
    for _ in 0..50 {
        let (p, rows, _, _) = random_prediction_set(&mut rng);
        let base = full_metric_vector(&p);
        // rebuild in reversed row order
        let y_true: Vec<u8> = rows.iter().rev().map(|r| r.0).collect();
        let y_pred: Vec<u8> = rows.iter().rev().map(|r| r.1).collect();
        let names: Vec<String> = rows.iter().rev().map(|r| format!("g{}", r.2)).collect();
        let priv_name = "g0".to_string();
        if !names.contains(&priv_name) {
            continue;
        }
        let q = PredictionSet::new(y_true, y_pred, &names, &priv_name).unwrap();
        let permuted = full_metric_vector(&q);
        for (name, (a, b)) in registry().iter().zip(base.values().iter().zip(permuted.values())) {
            match (a, b) {
                (None, None) => {}
                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12, "{name}: {x} vs {y}"),
                _ => panic!("{name}: definedness changed under permutation"),
            }
        }
    }
}
