//! Loading raw delimited files into validated tables.

use std::io::Read;

use crate::data::schema::{ColumnKind, DatasetSchema, Predicate, Role};
use crate::data::table::{Cell, Column, Origin, RawTable};
use crate::data::transforms::apply_dataset_transforms;
use crate::error::{Error, Result};

/// What happened while loading: row counts in, dropped per rule, rows out.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub initial_rows: usize,
    /// (column, rows dropped because the cell was the missing token)
    pub missing_dropped: Vec<(String, usize)>,
    /// (filter name, rows dropped)
    pub filter_dropped: Vec<(String, usize)>,
    /// Drop-role schema columns absent from the source (tolerated).
    pub absent_drop_columns: Vec<String>,
    pub final_rows: usize,
}

impl LoadReport {
    pub fn total_missing_dropped(&self) -> usize {
        self.missing_dropped.iter().map(|(_, n)| n).sum()
    }

    pub fn total_filter_dropped(&self) -> usize {
        self.filter_dropped.iter().map(|(_, n)| n).sum()
    }

    /// One line per cleaning rule, for stage summaries and count diagnostics.
    pub fn describe(&self) -> String {
        let mut out = format!("rows in: {}\n", self.initial_rows);
        for (col, n) in &self.missing_dropped {
            if *n > 0 {
                out.push_str(&format!("  missing '{col}': -{n}\n"));
            }
        }
        for (f, n) in &self.filter_dropped {
            out.push_str(&format!("  filter '{f}': -{n}\n"));
        }
        for c in &self.absent_drop_columns {
            out.push_str(&format!("  note: drop-role column '{c}' absent from source\n"));
        }
        out.push_str(&format!("rows out: {}", self.final_rows));
        out
    }
}

/// Load, clean, transform, and validate one dataset from delimited text.
///
/// Steps: drop rows containing the missing token in any retained column,
/// apply the schema row filters, apply registered transforms, drop the
/// drop-role columns, binarize the label, and validate the result.
pub fn load_dataset<R: Read>(schema: &DatasetSchema, source: R) -> Result<(RawTable, LoadReport)> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    // Source index for every schema column; drop-role columns may be absent
    // (already removed from a re-serialized table).
    let mut src_index: Vec<Option<usize>> = Vec::with_capacity(schema.columns.len());
    let mut report = LoadReport::default();
    for col in &schema.columns {
        match headers.iter().position(|h| *h == col.name) {
            Some(i) => src_index.push(Some(i)),
            None if col.role == Role::Drop => {
                report.absent_drop_columns.push(col.name.clone());
                src_index.push(None);
            }
            None => {
                return Err(Error::Load(format!(
                    "unknown column: schema column '{}' not found in source header",
                    col.name
                )))
            }
        }
    }
    if !schema.ignore_unlisted {
        for h in &headers {
            if !schema.columns.iter().any(|c| c.name == *h) {
                return Err(Error::Load(format!(
                    "source column '{h}' is not listed in the schema (set 'unlisted: ignore' to skip)"
                )));
            }
        }
    }

    let present: Vec<(usize, usize)> = src_index
        .iter()
        .enumerate()
        .filter_map(|(schema_i, src)| src.map(|s| (schema_i, s)))
        .collect();

    let mut missing_dropped = vec![0usize; schema.columns.len()];
    let mut filter_dropped = vec![0usize; schema.row_filters.len()];
    let mut kept: Vec<Vec<String>> = Vec::new();

    'rows: for record in reader.records() {
        let record = record?;
        report.initial_rows += 1;
        let mut row: Vec<String> = vec![String::new(); schema.columns.len()];
        for &(schema_i, src_i) in &present {
            let raw = record.get(src_i).ok_or_else(|| {
                Error::Load(format!("row {} is shorter than the header", report.initial_rows))
            })?;
            row[schema_i] = raw.trim().to_string();
        }
        // Missing-data policy: drop the whole row. Drop-role columns do not
        // participate (filters decide their fate explicitly).
        for (i, col) in schema.columns.iter().enumerate() {
            if col.role != Role::Drop && src_index[i].is_some() && row[i] == schema.missing_token {
                missing_dropped[i] += 1;
                continue 'rows;
            }
        }
        for (fi, filter) in schema.row_filters.iter().enumerate() {
            let ci = schema
                .columns
                .iter()
                .position(|c| c.name == filter.column)
                .expect("validated");
            if src_index[ci].is_none() {
                continue; // column already dropped upstream; filter was applied then
            }
            let value = &row[ci];
            let pass = match &filter.predicate {
                Predicate::Between(lo, hi) => match value.parse::<f64>() {
                    Ok(v) => v >= *lo && v <= *hi,
                    Err(_) => false,
                },
                Predicate::Ne(v) => value != v,
                Predicate::Eq(v) => value == v,
            };
            if !pass {
                filter_dropped[fi] += 1;
                continue 'rows;
            }
        }
        kept.push(row);
    }

    for (i, col) in schema.columns.iter().enumerate() {
        report.missing_dropped.push((col.name.clone(), missing_dropped[i]));
    }
    for (fi, f) in schema.row_filters.iter().enumerate() {
        report.filter_dropped.push((f.name.clone(), filter_dropped[fi]));
    }

    // Build typed cells for retained columns.
    let retained: Vec<usize> = (0..schema.columns.len())
        .filter(|&i| src_index[i].is_some())
        .collect();
    let columns: Vec<Column> = retained
        .iter()
        .map(|&i| {
            let c = &schema.columns[i];
            Column {
                name: c.name.clone(),
                kind: c.kind,
                role: schema.resolved_role(&c.name),
                origin: Origin::Plain,
            }
        })
        .collect();
    let mut rows: Vec<Vec<Cell>> = Vec::with_capacity(kept.len());
    for (ri, row) in kept.iter().enumerate() {
        let mut cells = Vec::with_capacity(retained.len());
        for &i in &retained {
            let text = &row[i];
            let cell = match schema.columns[i].kind {
                ColumnKind::Numeric => {
                    let v: f64 = text.parse().map_err(|_| {
                        Error::Load(format!(
                            "column '{}' row {}: cannot parse '{}' as a number",
                            schema.columns[i].name,
                            ri + 1,
                            text
                        ))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Load(format!(
                            "column '{}' row {}: non-finite value",
                            schema.columns[i].name,
                            ri + 1
                        )));
                    }
                    Cell::Num(v)
                }
                ColumnKind::Categorical => Cell::Cat(text.clone()),
            };
            cells.push(cell);
        }
        rows.push(cells);
    }

    let mut table = RawTable {
        dataset: schema.name.clone(),
        columns,
        rows,
        sensitive: schema.sensitive.clone(),
        label: schema.label.clone(),
    };

    table = apply_dataset_transforms(&table, &schema.transforms)?;

    // Derived columns pick up their declared roles.
    for col in &mut table.columns {
        col.role = schema.resolved_role(&col.name);
    }

    // Remove drop-role columns now that filters have run.
    let keep_mask: Vec<bool> = table.columns.iter().map(|c| c.role != Role::Drop).collect();
    table.columns = table
        .columns
        .into_iter()
        .zip(&keep_mask)
        .filter(|(_, keep)| **keep)
        .map(|(c, _)| c)
        .collect();
    for row in &mut table.rows {
        let mut i = 0;
        row.retain(|_| {
            let keep = keep_mask[i];
            i += 1;
            keep
        });
    }

    binarize_label(&mut table, &schema.positive_label)?;

    if table.rows.is_empty() {
        return Err(Error::Load(format!(
            "dataset '{}': no rows remain after cleaning",
            schema.name
        )));
    }
    report.final_rows = table.rows.len();
    table.validate()?;
    Ok((table, report))
}

/// Encode the label column to 0/1 with the positive label mapped to 1.
///
/// A column whose values are already exactly {0, 1} (or numeric 0/1) passes
/// through unchanged so that reloading serialized output is idempotent.
fn binarize_label(table: &mut RawTable, positive: &str) -> Result<()> {
    let li = table.label_index()?;
    let mut distinct: Vec<String> = Vec::new();
    for row in &table.rows {
        let text = match &row[li] {
            Cell::Cat(s) => s.clone(),
            Cell::Num(v) => format!("{v}"),
        };
        if !distinct.contains(&text) {
            distinct.push(text);
        }
    }
    if distinct.len() > 2 {
        return Err(Error::Load(format!(
            "non-binary label after filtering: column '{}' has {} distinct values",
            table.label,
            distinct.len()
        )));
    }
    let already_binary = distinct.iter().all(|v| v == "0" || v == "1");
    if !already_binary && !distinct.iter().any(|v| v == positive) {
        return Err(Error::Load(format!(
            "positive label '{positive}' never occurs in column '{}'",
            table.label
        )));
    }
    for row in &mut table.rows {
        let text = match &row[li] {
            Cell::Cat(s) => s.clone(),
            Cell::Num(v) => format!("{v}"),
        };
        let bit = if already_binary {
            if text == "1" { 1.0 } else { 0.0 }
        } else if text == positive {
            1.0
        } else {
            0.0
        };
        row[li] = Cell::Num(bit);
    }
    table.columns[li].kind = ColumnKind::Numeric;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::DatasetSchema;

    const SCHEMA: &str = "\
name: toy
missing: ?
label: outcome
positive: yes
column: score numeric
column: offset numeric drop
column: group categorical
column: outcome categorical
sensitive: group privileged=a
filter: window offset between -30 30
";

    const DATA: &str = "\
score,offset,group,outcome
10,0,a,yes
20,5,b,no
?,1,a,yes
30,99,b,yes
40,-2,a,no
";

    fn schema() -> DatasetSchema {
        DatasetSchema::parse(SCHEMA).unwrap()
    }

    #[test]
    fn drops_missing_and_filtered_rows() {
        let (table, report) = load_dataset(&schema(), DATA.as_bytes()).unwrap();
        assert_eq!(report.initial_rows, 5);
        assert_eq!(report.total_missing_dropped(), 1);
        assert_eq!(report.total_filter_dropped(), 1);
        assert_eq!(table.n_rows(), 3);
        // drop-role column removed
        assert!(table.col_index("offset").is_err());
        assert_eq!(table.labels().unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn idempotent_on_reserialized_output() {
        let (table, _) = load_dataset(&schema(), DATA.as_bytes()).unwrap();
        let csv = table.to_csv_string().unwrap();
        let (again, report2) = load_dataset(&schema(), csv.as_bytes()).unwrap();
        assert_eq!(report2.total_missing_dropped(), 0);
        assert_eq!(report2.total_filter_dropped(), 0);
        assert_eq!(again.to_csv_string().unwrap(), csv);
        assert_eq!(again.rows, table.rows);
    }

    #[test]
    fn unknown_schema_column_is_an_error() {
        let s = DatasetSchema::parse(&SCHEMA.replace("column: score numeric", "column: points numeric")).unwrap();
        let err = load_dataset(&s, DATA.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("unknown column"), "{err}");
    }

    #[test]
    fn unlisted_source_column_is_an_error_by_default() {
        let data = DATA.replace("score,offset", "score,extra,offset").replace("10,0", "10,9,0");
        let err = load_dataset(&schema(), data.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("not listed"), "{err}");
    }

    #[test]
    fn non_binary_label_is_an_error() {
        let data = DATA.replace("20,5,b,no", "20,5,b,maybe");
        let err = load_dataset(&schema(), data.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("non-binary label"), "{err}");
    }

    #[test]
    fn empty_result_is_an_error() {
        let data = "score,offset,group,outcome\n10,99,a,yes\n";
        let err = load_dataset(&schema(), data.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("no rows remain"), "{err}");
    }

    #[test]
    fn whitespace_around_cells_is_trimmed() {
        let data = "score,offset,group,outcome\n 10 , 0 , a , yes \n 11 , 0 , b , no \n";
        let (table, _) = load_dataset(&schema(), data.as_bytes()).unwrap();
        assert_eq!(table.rows[0][0], Cell::Num(10.0));
        assert_eq!(table.rows[0][1].as_cat(), Some("a"));
    }
}
