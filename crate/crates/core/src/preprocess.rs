//! Standardized dataset variants, combined sensitive attributes, and
//! reproducible train/test split plans.

use crate::data::schema::{ColumnKind, Role, SensitiveSpec};
use crate::data::table::{Cell, Column, Origin, RawTable};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::rng::SplitMix64;

/// The three standardized encodings every algorithm consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantTag {
    Original,
    Numerical,
    NumericalBinary,
}

impl VariantTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariantTag::Original => "original",
            VariantTag::Numerical => "numerical",
            VariantTag::NumericalBinary => "numerical_binary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(VariantTag::Original),
            "numerical" => Ok(VariantTag::Numerical),
            "numerical_binary" => Ok(VariantTag::NumericalBinary),
            other => Err(Error::Preprocess(format!("unknown variant '{other}'"))),
        }
    }

    pub fn all() -> [VariantTag; 3] {
        [VariantTag::Original, VariantTag::Numerical, VariantTag::NumericalBinary]
    }
}

/// A dataset under one preprocessing variant.
#[derive(Debug, Clone)]
pub struct ProcessedTable {
    pub variant: VariantTag,
    pub table: RawTable,
    /// Per categorical feature column: category order used for indicators.
    pub encoding_map: Vec<(String, Vec<String>)>,
    /// Per sensitive column: category order; the integer code is the index.
    pub sensitive_encoding: Vec<(String, Vec<String>)>,
}

/// Name of the integer-code companion column for a sensitive attribute.
pub fn code_column_name(sensitive: &str) -> String {
    format!("{sensitive}__code")
}

/// Wrap a cleaned table as the `original` variant.
pub fn to_original(table: &RawTable) -> ProcessedTable {
    ProcessedTable {
        variant: VariantTag::Original,
        table: table.clone(),
        encoding_map: Vec::new(),
        sensitive_encoding: Vec::new(),
    }
}

/// Add a combined sensitive attribute (values and privileged value joined
/// with '-') built from two or more existing sensitive attributes.
pub fn combine_sensitive(table: &RawTable, attrs: &[&str]) -> Result<RawTable> {
    if attrs.len() < 2 {
        return Err(Error::Preprocess(
            "combining sensitive attributes requires at least two".into(),
        ));
    }
    let mut indices = Vec::with_capacity(attrs.len());
    let mut privileged_parts = Vec::with_capacity(attrs.len());
    for name in attrs {
        let idx = table
            .col_index(name)
            .map_err(|_| Error::Preprocess(format!("sensitive attribute '{name}' not found")))?;
        if table.columns[idx].role != Role::Sensitive {
            return Err(Error::Preprocess(format!("column '{name}' is not sensitive")));
        }
        let spec = table.sensitive_spec(name)?;
        privileged_parts.push(spec.privileged_value.clone());
        indices.push(idx);
    }
    let combined_name = attrs.join("-");
    if table.col_index(&combined_name).is_ok() {
        return Err(Error::Preprocess(format!("column '{combined_name}' already exists")));
    }

    let mut out = table.clone();
    out.columns.push(Column {
        name: combined_name.clone(),
        kind: ColumnKind::Categorical,
        role: Role::Sensitive,
        origin: Origin::Plain,
    });
    for row in &mut out.rows {
        let parts: Result<Vec<&str>> = indices
            .iter()
            .map(|&i| {
                row[i]
                    .as_cat()
                    .ok_or_else(|| Error::Preprocess("sensitive column must be categorical".into()))
            })
            .collect();
        let value = parts?.join("-");
        row.push(Cell::Cat(value));
    }
    out.sensitive.push(SensitiveSpec {
        column: combined_name,
        privileged_value: privileged_parts.join("-"),
    });
    Ok(out)
}

/// One-hot encode categorical feature columns (category order = first
/// appearance) and attach an integer code column per sensitive attribute.
pub fn encode_numerical(table: &RawTable) -> Result<ProcessedTable> {
    let mut columns = Vec::new();
    let mut row_builders: Vec<Vec<Cell>> = vec![Vec::new(); table.n_rows()];
    let mut encoding_map = Vec::new();
    let mut sensitive_encoding = Vec::new();

    for (ci, col) in table.columns.iter().enumerate() {
        match (col.role, col.kind) {
            (Role::Feature, ColumnKind::Numeric) | (Role::Label, _) => {
                columns.push(col.clone());
                for (r, row) in table.rows.iter().enumerate() {
                    row_builders[r].push(row[ci].clone());
                }
            }
            (Role::Feature, ColumnKind::Categorical) => {
                let cats = table.categories(ci);
                for cat in &cats {
                    columns.push(Column {
                        name: format!("{}={}", col.name, cat),
                        kind: ColumnKind::Numeric,
                        role: Role::Feature,
                        origin: Origin::Indicator { source: col.name.clone(), category: cat.clone() },
                    });
                }
                for (r, row) in table.rows.iter().enumerate() {
                    let value = row[ci]
                        .as_cat()
                        .ok_or_else(|| Error::Preprocess(format!("mixed cells in '{}'", col.name)))?;
                    for cat in &cats {
                        row_builders[r].push(Cell::Num(if value == cat { 1.0 } else { 0.0 }));
                    }
                }
                encoding_map.push((col.name.clone(), cats));
            }
            (Role::Sensitive, ColumnKind::Categorical) => {
                let cats = table.categories(ci);
                columns.push(col.clone());
                columns.push(Column {
                    name: code_column_name(&col.name),
                    kind: ColumnKind::Numeric,
                    role: Role::Sensitive,
                    origin: Origin::SensitiveCode { source: col.name.clone() },
                });
                for (r, row) in table.rows.iter().enumerate() {
                    let value = row[ci]
                        .as_cat()
                        .ok_or_else(|| Error::Preprocess(format!("mixed cells in '{}'", col.name)))?;
                    let code = cats.iter().position(|c| c == value).expect("category scan");
                    row_builders[r].push(row[ci].clone());
                    row_builders[r].push(Cell::Num(code as f64));
                }
                sensitive_encoding.push((col.name.clone(), cats));
            }
            (Role::Sensitive, ColumnKind::Numeric) => {
                return Err(Error::Preprocess(format!(
                    "sensitive column '{}' must be categorical before encoding",
                    col.name
                )));
            }
            (Role::Drop, _) => {}
        }
    }

    let out = RawTable {
        dataset: table.dataset.clone(),
        columns,
        rows: row_builders,
        sensitive: table.sensitive.clone(),
        label: table.label.clone(),
    };
    out.validate()?;
    Ok(ProcessedTable {
        variant: VariantTag::Numerical,
        table: out,
        encoding_map,
        sensitive_encoding,
    })
}

/// Recode every sensitive column to 1 for the privileged value and 0 for
/// everything else. Idempotent.
pub fn binarize_sensitive(processed: &ProcessedTable) -> Result<ProcessedTable> {
    match processed.variant {
        VariantTag::Numerical | VariantTag::NumericalBinary => {}
        VariantTag::Original => {
            return Err(Error::Preprocess(
                "binarize_sensitive expects the numerical variant".into(),
            ))
        }
    }
    let mut out = processed.clone();
    out.variant = VariantTag::NumericalBinary;
    out.sensitive_encoding.clear();

    for spec_idx in 0..out.table.sensitive.len() {
        let spec = out.table.sensitive[spec_idx].clone();
        let ci = out.table.col_index(&spec.column)?;
        let observed = out.table.categories(ci);
        if !observed.iter().any(|c| *c == spec.privileged_value) {
            return Err(Error::Preprocess(format!(
                "privileged value '{}' absent from column '{}'",
                spec.privileged_value, spec.column
            )));
        }
        let code_ci = out.table.col_index(&code_column_name(&spec.column)).ok();
        for row in &mut out.table.rows {
            let value = row[ci].as_cat().expect("sensitive columns stay categorical");
            let bit = if value == spec.privileged_value { 1.0 } else { 0.0 };
            row[ci] = Cell::Cat(if bit == 1.0 { "1" } else { "0" }.to_string());
            if let Some(cci) = code_ci {
                row[cci] = Cell::Num(bit);
            }
        }
        out.table.sensitive[spec_idx].privileged_value = "1".to_string();
        out.sensitive_encoding.push((spec.column.clone(), vec!["0".into(), "1".into()]));
    }
    out.table.validate()?;
    Ok(out)
}

impl ProcessedTable {
    /// Matrix column indices for learner input: numeric features, one-hot
    /// indicators, and (optionally) the sensitive code columns.
    pub fn feature_column_indices(&self, include_sensitive_codes: bool) -> Vec<usize> {
        self.table
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| match (&c.role, &c.origin) {
                (Role::Feature, _) => c.kind == ColumnKind::Numeric,
                (Role::Sensitive, Origin::SensitiveCode { .. }) => include_sensitive_codes,
                _ => false,
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Assemble a feature matrix over the given rows and table columns.
    pub fn matrix(&self, rows: &[usize], cols: &[usize]) -> Result<FeatureMatrix> {
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self
                .table
                .rows
                .get(r)
                .ok_or_else(|| Error::Preprocess(format!("row index {r} out of bounds")))?;
            for &c in cols {
                let v = row[c].as_num().ok_or_else(|| {
                    Error::Preprocess(format!(
                        "column '{}' is not numeric; use the numerical variant",
                        self.table.columns[c].name
                    ))
                })?;
                values.push(v);
            }
        }
        FeatureMatrix::new(rows.len(), cols.len(), values)
    }

    pub fn labels_for(&self, rows: &[usize]) -> Result<Vec<u8>> {
        let all = self.table.labels()?;
        rows.iter()
            .map(|&r| {
                all.get(r)
                    .copied()
                    .ok_or_else(|| Error::Preprocess(format!("row index {r} out of bounds")))
            })
            .collect()
    }

    /// Categorical sensitive values for metric grouping.
    pub fn sensitive_values(&self, column: &str, rows: &[usize]) -> Result<Vec<String>> {
        let ci = self.table.col_index(column)?;
        rows.iter()
            .map(|&r| {
                self.table.rows[r][ci]
                    .as_cat()
                    .map(str::to_string)
                    .ok_or_else(|| Error::Preprocess(format!("column '{column}' is not categorical")))
            })
            .collect()
    }

    /// 0/1 codes of a binarized sensitive column.
    pub fn sensitive_binary_codes(&self, column: &str, rows: &[usize]) -> Result<Vec<u8>> {
        if self.variant != VariantTag::NumericalBinary {
            return Err(Error::Preprocess(
                "binary sensitive codes require the numerical_binary variant".into(),
            ));
        }
        let ci = self.table.col_index(&code_column_name(column))?;
        rows.iter()
            .map(|&r| match self.table.rows[r][ci] {
                Cell::Num(v) if v == 0.0 => Ok(0),
                Cell::Num(v) if v == 1.0 => Ok(1),
                _ => Err(Error::Preprocess(format!("non-binary code in '{column}'"))),
            })
            .collect()
    }
}

/// One train/test split: disjoint exhaustive row-index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub split_id: usize,
    pub seed: u64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Generate `n_splits` reproducible uniform splits. Split `i` draws from the
/// fixed generator seeded with `master_seed ^ i`, so any single split can be
/// regenerated independently.
pub fn make_splits(
    n_rows: usize,
    n_splits: usize,
    train_fraction: f64,
    master_seed: u64,
) -> Result<Vec<SplitPlan>> {
    if n_splits == 0 {
        return Err(Error::Preprocess("n_splits must be at least 1".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Preprocess(format!(
            "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let train_size = (train_fraction * n_rows as f64).ceil() as usize;
    if train_size == 0 || train_size >= n_rows {
        return Err(Error::Preprocess(format!(
            "{n_rows} rows cannot be split {train_fraction}:{} with a non-empty test set",
            1.0 - train_fraction
        )));
    }
    let mut plans = Vec::with_capacity(n_splits);
    for split_id in 0..n_splits {
        let seed = master_seed ^ split_id as u64;
        let mut rng = SplitMix64::new(seed);
        let mut order: Vec<usize> = (0..n_rows).collect();
        rng.shuffle(&mut order);
        let mut train: Vec<usize> = order[..train_size].to_vec();
        let mut test: Vec<usize> = order[train_size..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        plans.push(SplitPlan { split_id, seed, train_indices: train, test_indices: test });
    }
    Ok(plans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::synth_generate;

    fn toy() -> RawTable {
        let columns = vec![
            Column { name: "score".into(), kind: ColumnKind::Numeric, role: Role::Feature, origin: Origin::Plain },
            Column { name: "color".into(), kind: ColumnKind::Categorical, role: Role::Feature, origin: Origin::Plain },
            Column { name: "race".into(), kind: ColumnKind::Categorical, role: Role::Sensitive, origin: Origin::Plain },
            Column { name: "sex".into(), kind: ColumnKind::Categorical, role: Role::Sensitive, origin: Origin::Plain },
            Column { name: "y".into(), kind: ColumnKind::Numeric, role: Role::Label, origin: Origin::Plain },
        ];
        let mk = |s: f64, c: &str, r: &str, x: &str, y: f64| {
            vec![Cell::Num(s), Cell::Cat(c.into()), Cell::Cat(r.into()), Cell::Cat(x.into()), Cell::Num(y)]
        };
        RawTable {
            dataset: "toy".into(),
            columns,
            rows: vec![
                mk(1.0, "red", "White", "Man", 1.0),
                mk(2.0, "green", "Black", "Woman", 0.0),
                mk(3.0, "blue", "White", "Woman", 1.0),
                mk(4.0, "green", "Asian", "Man", 0.0),
            ],
            sensitive: vec![
                SensitiveSpec { column: "race".into(), privileged_value: "White".into() },
                SensitiveSpec { column: "sex".into(), privileged_value: "Man".into() },
            ],
            label: "y".into(),
        }
    }

    #[test]
    fn combine_joins_values_and_privilege() {
        let t = combine_sensitive(&toy(), &["race", "sex"]).unwrap();
        let ci = t.col_index("race-sex").unwrap();
        assert_eq!(t.rows[2][ci].as_cat(), Some("White-Woman"));
        let spec = t.sensitive_spec("race-sex").unwrap();
        assert_eq!(spec.privileged_value, "White-Man");
    }

    #[test]
    fn combine_requires_two_attributes() {
        assert!(combine_sensitive(&toy(), &["race"]).is_err());
        assert!(combine_sensitive(&toy(), &["race", "score"]).is_err());
        assert!(combine_sensitive(&toy(), &["race", "nope"]).is_err());
    }

    #[test]
    fn one_hot_indicators_partition() {
        let p = encode_numerical(&toy()).unwrap();
        assert_eq!(p.variant, VariantTag::Numerical);
        // color in {red, green, blue}, first row red -> (1,0,0); second green -> (0,1,0)
        let red = p.table.col_index("color=red").unwrap();
        let green = p.table.col_index("color=green").unwrap();
        let blue = p.table.col_index("color=blue").unwrap();
        assert_eq!(p.table.rows[1][red], Cell::Num(0.0));
        assert_eq!(p.table.rows[1][green], Cell::Num(1.0));
        assert_eq!(p.table.rows[1][blue], Cell::Num(0.0));
        for row in &p.table.rows {
            let sum = row[red].as_num().unwrap() + row[green].as_num().unwrap() + row[blue].as_num().unwrap();
            assert_eq!(sum, 1.0);
        }
        // numeric column passes through
        let score = p.table.col_index("score").unwrap();
        assert_eq!(p.table.rows[3][score], Cell::Num(4.0));
        // sensitive kept categorical alongside a code column
        let race_code = p.table.col_index("race__code").unwrap();
        assert_eq!(p.table.rows[0][race_code], Cell::Num(0.0)); // White first seen
        assert_eq!(p.table.rows[1][race_code], Cell::Num(1.0)); // Black second
        // row count and labels unchanged
        assert_eq!(p.table.n_rows(), 4);
        assert_eq!(p.table.labels().unwrap(), vec![1, 0, 1, 0]);
    }

    #[test]
    fn binarize_maps_privileged_to_one() {
        let p = encode_numerical(&toy()).unwrap();
        let b = binarize_sensitive(&p).unwrap();
        assert_eq!(b.variant, VariantTag::NumericalBinary);
        let race = b.table.col_index("race").unwrap();
        let vals: Vec<_> = b.table.rows.iter().map(|r| r[race].as_cat().unwrap().to_string()).collect();
        assert_eq!(vals, vec!["1", "0", "1", "0"]); // White privileged, Asian/Black -> 0
        assert_eq!(b.table.sensitive_spec("race").unwrap().privileged_value, "1");
        let codes = b.sensitive_binary_codes("race", &[0, 1, 2, 3]).unwrap();
        assert_eq!(codes, vec![1, 0, 1, 0]);
        // idempotent
        let again = binarize_sensitive(&b).unwrap();
        assert_eq!(again.table.rows, b.table.rows);
    }

    #[test]
    fn feature_selection_with_and_without_codes() {
        let p = binarize_sensitive(&encode_numerical(&toy()).unwrap()).unwrap();
        let without = p.feature_column_indices(false);
        let with = p.feature_column_indices(true);
        assert_eq!(with.len(), without.len() + 2); // race__code and sex__code
        let names: Vec<_> = without.iter().map(|&i| p.table.columns[i].name.clone()).collect();
        assert!(names.contains(&"score".to_string()));
        assert!(names.contains(&"color=red".to_string()));
        assert!(!names.iter().any(|n| n.ends_with("__code")));
    }

    #[test]
    fn splits_partition_exactly() {
        let plans = make_splits(9, 10, 2.0 / 3.0, 42).unwrap();
        assert_eq!(plans.len(), 10);
        for p in &plans {
            assert_eq!(p.train_indices.len(), 6);
            assert_eq!(p.test_indices.len(), 3);
            let mut all: Vec<usize> = p.train_indices.iter().chain(&p.test_indices).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..9).collect::<Vec<_>>());
        }
    }

    #[test]
    fn splits_reproduce_from_seed() {
        let a = make_splits(100, 10, 2.0 / 3.0, 42).unwrap();
        let b = make_splits(100, 10, 2.0 / 3.0, 42).unwrap();
        assert_eq!(a, b);
        let c = make_splits(100, 10, 2.0 / 3.0, 43).unwrap();
        assert_ne!(a, c);
        // split seeds are master ^ id
        assert_eq!(a[3].seed, 42 ^ 3);
    }

    #[test]
    fn split_rejects_degenerate_sizes() {
        assert!(make_splits(2, 1, 2.0 / 3.0, 1).is_err());
        assert!(make_splits(100, 0, 2.0 / 3.0, 1).is_err());
        assert!(make_splits(100, 1, 1.0, 1).is_err());
    }

    #[test]
    fn encoding_preserves_rows_and_labels_on_synth() {
        let t = synth_generate(200, 0.4, 3).unwrap();
        let p = encode_numerical(&t).unwrap();
        assert_eq!(p.table.n_rows(), t.n_rows());
        assert_eq!(p.table.labels().unwrap(), t.labels().unwrap());
        let b = binarize_sensitive(&p).unwrap();
        assert_eq!(b.table.n_rows(), t.n_rows());
        assert_eq!(b.table.labels().unwrap(), t.labels().unwrap());
    }
}
