//! Disparate-impact repair: move each numeric feature toward the cross-group
//! median quantile function so group marginals converge, without touching
//! labels or sensitive columns. Rank-preserving within every group.

use crate::data::schema::{ColumnKind, Role};
use crate::data::table::{Cell, Origin};
use crate::error::{Error, Result};
use crate::preprocess::{ProcessedTable, VariantTag};

/// A processed table with repaired feature columns.
#[derive(Debug, Clone)]
pub struct RepairedTable {
    pub table: ProcessedTable,
    /// Repair amount in [0, 1]: 0 leaves data untouched, 1 fully equalizes
    /// group marginals.
    pub amount: f64,
    pub repaired_columns: Vec<String>,
}

/// Empirical quantile of sorted values at rank r in [0, 1], linearly
/// interpolated between order statistics.
fn quantile(sorted: &[f64], r: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let pos = r * (m - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        (values[m / 2 - 1] + values[m / 2]) / 2.0
    }
}

/// Mid-rank of `v` within its group in [0, 1]; ties share a rank so the
/// repair is a function of the value.
fn mid_rank(sorted: &[f64], v: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return 0.5;
    }
    let below = sorted.partition_point(|x| *x < v);
    let upto = sorted.partition_point(|x| *x <= v);
    let equal = upto - below;
    (below as f64 + (equal as f64 - 1.0) / 2.0) / (m - 1) as f64
}

/// Repair every plain numeric feature column (indicator columns only when
/// `include_indicators` is set): each value at within-group quantile rank r
/// becomes (1 - amount) * v + amount * T(r), where T(r) is the median across
/// groups of the group empirical quantile at r.
pub fn repair_disparate_impact(
    table: &ProcessedTable,
    sensitive: &str,
    amount: f64,
    include_indicators: bool,
) -> Result<RepairedTable> {
    match table.variant {
        VariantTag::Numerical | VariantTag::NumericalBinary => {}
        VariantTag::Original => {
            return Err(Error::Preprocess(
                "repair requires a numerical variant".into(),
            ))
        }
    }
    if !(0.0..=1.0).contains(&amount) {
        return Err(Error::Preprocess(format!("repair amount must lie in [0,1], got {amount}")));
    }
    let si = table.table.col_index(sensitive)?;
    if table.table.columns[si].role != Role::Sensitive {
        return Err(Error::Preprocess(format!("column '{sensitive}' is not sensitive")));
    }

    // Group id per row, in first-appearance order of the sensitive value.
    let group_values = table.table.categories(si);
    if group_values.is_empty() {
        return Err(Error::Preprocess("no sensitive groups observed".into()));
    }
    let row_group: Vec<usize> = table
        .table
        .rows
        .iter()
        .map(|row| {
            let v = row[si].as_cat().expect("sensitive columns are categorical");
            group_values.iter().position(|g| g == v).expect("observed")
        })
        .collect();

    let target_columns: Vec<usize> = table
        .table
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            c.role == Role::Feature
                && match &c.origin {
                    Origin::Plain => true,
                    Origin::Indicator { .. } => include_indicators,
                    Origin::SensitiveCode { .. } => false,
                }
        })
        .map(|(i, _)| i)
        .collect();

    let mut out = table.clone();
    let mut repaired_columns = Vec::with_capacity(target_columns.len());
    for &ci in &target_columns {
        let col = &table.table.columns[ci];
        if col.kind != ColumnKind::Numeric {
            return Err(Error::Preprocess(format!(
                "cannot repair non-numeric feature column '{}'",
                col.name
            )));
        }
        // Per-group sorted values.
        let mut by_group: Vec<Vec<f64>> = vec![Vec::new(); group_values.len()];
        for (row, &g) in table.table.rows.iter().zip(&row_group) {
            by_group[g].push(row[ci].as_num().expect("numeric column"));
        }
        for group in &mut by_group {
            if group.is_empty() {
                return Err(Error::Preprocess("empty sensitive group".into()));
            }
            group.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        }
        for (row, &g) in out.table.rows.iter_mut().zip(&row_group) {
            let v = row[ci].as_num().expect("numeric column");
            let r = mid_rank(&by_group[g], v);
            let mut per_group: Vec<f64> =
                by_group.iter().map(|sorted| quantile(sorted, r)).collect();
            let target = median(&mut per_group);
            row[ci] = Cell::Num((1.0 - amount) * v + amount * target);
        }
        repaired_columns.push(col.name.clone());
    }

    Ok(RepairedTable { table: out, amount, repaired_columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::SensitiveSpec;
    use crate::data::table::{Column, RawTable};
    use crate::rng::SplitMix64;

    /// Build a one-feature numerical table with explicit group/value pairs.
    fn table_from(pairs: &[(&str, f64)]) -> ProcessedTable {
        let columns = vec![
            Column { name: "x".into(), kind: ColumnKind::Numeric, role: Role::Feature, origin: Origin::Plain },
            Column { name: "g".into(), kind: ColumnKind::Categorical, role: Role::Sensitive, origin: Origin::Plain },
            Column { name: "y".into(), kind: ColumnKind::Numeric, role: Role::Label, origin: Origin::Plain },
        ];
        let rows: Vec<Vec<Cell>> = pairs
            .iter()
            .enumerate()
            .map(|(i, (g, v))| {
                vec![Cell::Num(*v), Cell::Cat(g.to_string()), Cell::Num((i % 2) as f64)]
            })
            .collect();
        ProcessedTable {
            variant: VariantTag::Numerical,
            table: RawTable {
                dataset: "t".into(),
                columns,
                rows,
                sensitive: vec![SensitiveSpec { column: "g".into(), privileged_value: pairs[0].0.into() }],
                label: "y".into(),
            },
            encoding_map: Vec::new(),
            sensitive_encoding: Vec::new(),
        }
    }

    fn column_values(t: &ProcessedTable, group: &str) -> Vec<f64> {
        let gi = t.table.col_index("g").unwrap();
        let xi = t.table.col_index("x").unwrap();
        t.table
            .rows
            .iter()
            .filter(|r| r[gi].as_cat() == Some(group))
            .map(|r| r[xi].as_num().unwrap())
            .collect()
    }

    #[test]
    fn zero_amount_is_the_identity() {
        let t = table_from(&[("a", 1.0), ("a", 2.0), ("b", 5.0), ("b", 9.0)]);
        let r = repair_disparate_impact(&t, "g", 0.0, false).unwrap();
        assert_eq!(r.table.table.rows, t.table.rows);
        assert_eq!(r.repaired_columns, vec!["x".to_string()]);
    }

    #[test]
    fn full_repair_maps_both_groups_to_rank_medians() {
        // groups {1,2,3} and {5,6,7}: medians at ranks 0, 1/2, 1 are 3, 4, 5
        let t = table_from(&[
            ("a", 1.0), ("a", 2.0), ("a", 3.0),
            ("b", 5.0), ("b", 6.0), ("b", 7.0),
        ]);
        let r = repair_disparate_impact(&t, "g", 1.0, false).unwrap();
        assert_eq!(column_values(&r.table, "a"), vec![3.0, 4.0, 5.0]);
        assert_eq!(column_values(&r.table, "b"), vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn half_repair_interpolates_linearly() {
        let t = table_from(&[
            ("a", 1.0), ("a", 2.0), ("a", 3.0),
            ("b", 5.0), ("b", 6.0), ("b", 7.0),
        ]);
        let r = repair_disparate_impact(&t, "g", 0.5, false).unwrap();
        // a's value 1 sits at rank 0; target 3; midpoint of 1 and 3 is 2
        assert_eq!(column_values(&r.table, "a")[0], 2.0);
    }

    /// Independent oracle: recompute one repaired value by counting-based
    /// ranks and a direct quantile-at-rank median, no shared code.
    fn oracle_repair(values: &[(usize, f64)], groups: usize, amount: f64, idx: usize) -> f64 {
        let (g0, v0) = values[idx];
        let mine: Vec<f64> = values.iter().filter(|(g, _)| *g == g0).map(|(_, v)| *v).collect();
        let m = mine.len();
        let rank = if m == 1 {
            0.5
        } else {
            let less = mine.iter().filter(|v| **v < v0).count() as f64;
            let equal = mine.iter().filter(|v| **v == v0).count() as f64;
            (less + (equal - 1.0) / 2.0) / (m as f64 - 1.0)
        };
        let mut quantiles = Vec::new();
        for g in 0..groups {
            let mut vals: Vec<f64> =
                values.iter().filter(|(gg, _)| *gg == g).map(|(_, v)| *v).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q = if vals.len() == 1 {
                vals[0]
            } else {
                let pos = rank * (vals.len() - 1) as f64;
                let lo = pos.floor() as usize;
                let frac = pos - lo as f64;
                if lo + 1 < vals.len() {
                    vals[lo] * (1.0 - frac) + vals[lo + 1] * frac
                } else {
                    vals[lo]
                }
            };
            quantiles.push(q);
        }
        quantiles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k = quantiles.len();
        let target = if k % 2 == 1 {
            quantiles[k / 2]
        } else {
            (quantiles[k / 2 - 1] + quantiles[k / 2]) / 2.0
        };
        (1.0 - amount) * v0 + amount * target
    }

    #[test]
    fn matches_counting_oracle_on_random_tables() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..30 {
            let groups = 2 + rng.below(2);
            let n = 10 + rng.below(40);
            let pairs: Vec<(usize, f64)> = (0..n)
                .map(|i| {
                    let g = if i < groups { i } else { rng.below(groups) };
                    (g, (rng.next_f64() * 20.0).round() / 2.0) // coarse grid forces ties
                })
                .collect();
            let names = ["a", "b", "c"];
            let named: Vec<(&str, f64)> = pairs.iter().map(|(g, v)| (names[*g], *v)).collect();
            let t = table_from(&named);
            let amount = rng.next_f64();
            let r = repair_disparate_impact(&t, "g", amount, false).unwrap();
            let xi = r.table.table.col_index("x").unwrap();
            for (idx, row) in r.table.table.rows.iter().enumerate() {
                let got = row[xi].as_num().unwrap();
                let want = oracle_repair(&pairs, groups, amount, idx);
                assert!((got - want).abs() < 1e-12, "row {idx}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn repair_is_monotone_within_groups() {
        let mut rng = SplitMix64::new(23);
        for _ in 0..20 {
            let n = 15 + rng.below(30);
            let pairs: Vec<(&str, f64)> = (0..n)
                .map(|i| (if i % 3 == 0 { "b" } else { "a" }, rng.normal() * 5.0))
                .collect();
            let t = table_from(&pairs);
            let amount = rng.next_f64();
            let r = repair_disparate_impact(&t, "g", amount, false).unwrap();
            for group in ["a", "b"] {
                let before = column_values(&t, group);
                let after = column_values(&r.table, group);
                let mut order: Vec<usize> = (0..before.len()).collect();
                order.sort_by(|&i, &j| before[i].partial_cmp(&before[j]).unwrap());
                for w in order.windows(2) {
                    assert!(
                        after[w[0]] <= after[w[1]] + 1e-12,
                        "within-group order broken at amount {amount}"
                    );
                }
            }
        }
    }

    #[test]
    fn repair_commutes_with_positive_affine_maps() {
        let mut rng = SplitMix64::new(31);
        let pairs: Vec<(&str, f64)> = (0..40)
            .map(|i| (if i % 2 == 0 { "a" } else { "b" }, rng.normal() * 3.0 + i as f64 * 0.1))
            .collect();
        let scaled: Vec<(&str, f64)> = pairs.iter().map(|(g, v)| (*g, 2.5 * v - 7.0)).collect();
        let r1 = repair_disparate_impact(&table_from(&pairs), "g", 0.7, false).unwrap();
        let r2 = repair_disparate_impact(&table_from(&scaled), "g", 0.7, false).unwrap();
        let xi = r1.table.table.col_index("x").unwrap();
        for (a, b) in r1.table.table.rows.iter().zip(&r2.table.table.rows) {
            let va = a[xi].as_num().unwrap();
            let vb = b[xi].as_num().unwrap();
            assert!((2.5 * va - 7.0 - vb).abs() < 1e-9, "{va} {vb}");
        }
    }

    /// Two-sample Kolmogorov-Smirnov distance.
    fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
        let mut xs: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
        xs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut worst: f64 = 0.0;
        for x in xs {
            let fa = a.iter().filter(|v| **v <= x).count() as f64 / a.len() as f64;
            let fb = b.iter().filter(|v| **v <= x).count() as f64 / b.len() as f64;
            worst = worst.max((fa - fb).abs());
        }
        worst
    }

    #[test]
    fn full_repair_equalizes_marginals_in_ks_distance() {
        let mut rng = SplitMix64::new(47);
        for _ in 0..10 {
            let n = 30 + rng.below(60);
            let pairs: Vec<(&str, f64)> = (0..n)
                .map(|i| {
                    if i % 2 == 0 {
                        ("a", rng.normal())
                    } else {
                        ("b", rng.normal() * 2.0 + 3.0)
                    }
                })
                .collect();
            let t = table_from(&pairs);
            let r = repair_disparate_impact(&t, "g", 1.0, false).unwrap();
            let a = column_values(&r.table, "a");
            let b = column_values(&r.table, "b");
            let bound = 2.0 / a.len().min(b.len()) as f64;
            let d = ks_distance(&a, &b);
            assert!(d <= bound + 1e-12, "ks {d} > bound {bound}");
        }
    }

    #[test]
    fn indicator_columns_skipped_by_default() {
        let mut t = table_from(&[("a", 1.0), ("a", 0.0), ("b", 1.0), ("b", 0.0)]);
        t.table.columns[0].origin =
            Origin::Indicator { source: "c".into(), category: "red".into() };
        let r = repair_disparate_impact(&t, "g", 1.0, false).unwrap();
        assert!(r.repaired_columns.is_empty());
        assert_eq!(r.table.table.rows, t.table.rows);
        let with = repair_disparate_impact(&t, "g", 1.0, true).unwrap();
        assert_eq!(with.repaired_columns, vec!["x".to_string()]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = table_from(&[("a", 1.0), ("b", 2.0)]);
        assert!(repair_disparate_impact(&t, "g", 1.5, false).is_err());
        assert!(repair_disparate_impact(&t, "x", 0.5, false).is_err());
        assert!(repair_disparate_impact(&t, "nope", 0.5, false).is_err());
    }
}
