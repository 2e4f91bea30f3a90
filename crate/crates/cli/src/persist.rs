//! Stage artifacts on disk. Every file is written atomically (temp file +
//! rename) with deterministic bytes, so interrupted runs can resume and
//! repeated runs compare equal.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use fairbench_core::data::{Cell, Column, ColumnKind, Origin, RawTable, Role, SensitiveSpec};
use fairbench_core::metrics::{registry, MetricVector};
use fairbench_core::preprocess::{ProcessedTable, SplitPlan, VariantTag};
use fairbench_core::{Error, Result};

pub struct OutDirs {
    pub root: PathBuf,
}

impl OutDirs {
    pub fn new(root: &Path) -> OutDirs {
        OutDirs { root: root.to_path_buf() }
    }

    pub fn processed(&self) -> PathBuf {
        self.root.join("processed")
    }

    pub fn splits(&self) -> PathBuf {
        self.root.join("splits")
    }

    pub fn results(&self) -> PathBuf {
        self.root.join("results")
    }

    pub fn cells(&self) -> PathBuf {
        self.root.join("cells")
    }

    pub fn predictions(&self) -> PathBuf {
        self.root.join("predictions")
    }

    pub fn models(&self) -> PathBuf {
        self.root.join("models")
    }

    pub fn analysis(&self) -> PathBuf {
        self.root.join("analysis")
    }

    pub fn processed_csv(&self, dataset: &str, variant: VariantTag) -> PathBuf {
        self.processed().join(format!("{dataset}_{}.csv", variant.as_str()))
    }

    pub fn processed_meta(&self, dataset: &str, variant: VariantTag) -> PathBuf {
        self.processed().join(format!("{dataset}_{}.meta", variant.as_str()))
    }

    pub fn splits_csv(&self, dataset: &str, seed: u64) -> PathBuf {
        self.splits().join(format!("{dataset}_{seed}.csv"))
    }

    pub fn results_csv(
        &self,
        dataset: &str,
        variant: VariantTag,
        sensitive: &str,
        algorithm: &str,
    ) -> PathBuf {
        self.results()
            .join(format!("{dataset}_{}_{sensitive}_{algorithm}.csv", variant.as_str()))
    }

    pub fn cell_csv(&self, run_id: &str) -> PathBuf {
        self.cells().join(format!("{run_id}.csv"))
    }

    pub fn cell_failed(&self, run_id: &str) -> PathBuf {
        self.cells().join(format!("{run_id}.failed"))
    }

    pub fn prediction_csv(&self, run_id: &str) -> PathBuf {
        self.predictions().join(format!("{run_id}.csv"))
    }

    pub fn model_file(&self, run_id: &str) -> PathBuf {
        self.models().join(format!("{run_id}.model"))
    }
}

/// Write bytes atomically: to a sibling temp file, then rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path
        .parent()
        .ok_or_else(|| Error::Io(std::io::Error::other("path has no parent")))?;
    std::fs::create_dir_all(parent)?;
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("x")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Shortest round-trip decimal, empty for undefined.
pub fn render_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

pub fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Format(format!("bad number '{s}'")))
    }
}

// ---------------------------------------------------------------------------
// Processed tables: CSV plus a .meta sidecar carrying column structure.
// ---------------------------------------------------------------------------

fn role_str(role: Role) -> &'static str {
    match role {
        Role::Feature => "feature",
        Role::Sensitive => "sensitive",
        Role::Label => "label",
        Role::Drop => "drop",
    }
}

fn parse_role(s: &str) -> Result<Role> {
    match s {
        "feature" => Ok(Role::Feature),
        "sensitive" => Ok(Role::Sensitive),
        "label" => Ok(Role::Label),
        "drop" => Ok(Role::Drop),
        other => Err(Error::Format(format!("unknown role '{other}'"))),
    }
}

pub fn write_processed(dirs: &OutDirs, table: &ProcessedTable) -> Result<()> {
    let csv_bytes = table.table.to_csv_string()?.into_bytes();
    write_atomic(&dirs.processed_csv(&table.table.dataset, table.variant), &csv_bytes)?;

    let mut meta = String::from("fairbench-meta v1\n");
    meta.push_str(&format!("dataset\t{}\n", table.table.dataset));
    meta.push_str(&format!("variant\t{}\n", table.variant.as_str()));
    meta.push_str(&format!("label\t{}\n", table.table.label));
    for col in &table.table.columns {
        let kind = match col.kind {
            ColumnKind::Categorical => "categorical",
            ColumnKind::Numeric => "numeric",
        };
        let origin = match &col.origin {
            Origin::Plain => "plain\t\t".to_string(),
            Origin::Indicator { source, category } => format!("indicator\t{source}\t{category}"),
            Origin::SensitiveCode { source } => format!("code\t{source}\t"),
        };
        meta.push_str(&format!("column\t{kind}\t{}\t{origin}\t{}\n", role_str(col.role), col.name));
    }
    for spec in &table.table.sensitive {
        meta.push_str(&format!("sensitive\t{}\t{}\n", spec.column, spec.privileged_value));
    }
    for (col, cats) in &table.encoding_map {
        meta.push_str(&format!("encode\t{col}\t{}\n", cats.join("\t")));
    }
    for (col, cats) in &table.sensitive_encoding {
        meta.push_str(&format!("scode\t{col}\t{}\n", cats.join("\t")));
    }
    write_atomic(&dirs.processed_meta(&table.table.dataset, table.variant), meta.as_bytes())
}

pub fn read_processed(dirs: &OutDirs, dataset: &str, variant: VariantTag) -> Result<ProcessedTable> {
    let meta_path = dirs.processed_meta(dataset, variant);
    let csv_path = dirs.processed_csv(dataset, variant);
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|_| {
        Error::Load(format!("processed artifact '{}' missing", meta_path.display()))
    })?;

    let mut columns: Vec<Column> = Vec::new();
    let mut sensitive: Vec<SensitiveSpec> = Vec::new();
    let mut encoding_map = Vec::new();
    let mut sensitive_encoding = Vec::new();
    let mut label = String::new();
    let mut name = String::new();
    let mut tag = None;
    let mut lines = meta_text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "fairbench-meta v1" {
        return Err(Error::Format(format!("unsupported meta header '{header}'")));
    }
    for line in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["dataset", v] => name = v.to_string(),
            ["variant", v] => tag = Some(VariantTag::parse(v)?),
            ["label", v] => label = v.to_string(),
            ["column", kind, role, origin, a, b, col_name] => {
                let kind = match *kind {
                    "categorical" => ColumnKind::Categorical,
                    "numeric" => ColumnKind::Numeric,
                    other => return Err(Error::Format(format!("unknown kind '{other}'"))),
                };
                let origin = match *origin {
                    "plain" => Origin::Plain,
                    "indicator" => {
                        Origin::Indicator { source: a.to_string(), category: b.to_string() }
                    }
                    "code" => Origin::SensitiveCode { source: a.to_string() },
                    other => return Err(Error::Format(format!("unknown origin '{other}'"))),
                };
                columns.push(Column {
                    name: col_name.to_string(),
                    kind,
                    role: parse_role(role)?,
                    origin,
                });
            }
            ["sensitive", col, privileged] => sensitive.push(SensitiveSpec {
                column: col.to_string(),
                privileged_value: privileged.to_string(),
            }),
            ["encode", col, rest @ ..] => {
                encoding_map
                    .push((col.to_string(), rest.iter().map(|s| s.to_string()).collect()));
            }
            ["scode", col, rest @ ..] => {
                sensitive_encoding
                    .push((col.to_string(), rest.iter().map(|s| s.to_string()).collect()));
            }
            _ => return Err(Error::Format(format!("bad meta line '{line}'"))),
        }
    }
    let variant_tag =
        tag.ok_or_else(|| Error::Format("meta file missing the variant".into()))?;

    // Read the CSV against the reconstructed column structure.
    let file = std::fs::File::open(&csv_path)
        .map_err(|_| Error::Load(format!("processed artifact '{}' missing", csv_path.display())))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    if headers.len() != columns.len()
        || headers.iter().zip(&columns).any(|(h, c)| *h != c.name)
    {
        return Err(Error::Format("processed csv header does not match its meta".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut row = Vec::with_capacity(columns.len());
        for (i, col) in columns.iter().enumerate() {
            let text = record
                .get(i)
                .ok_or_else(|| Error::Format("short row in processed csv".into()))?;
            let cell = match col.kind {
                ColumnKind::Numeric => Cell::Num(
                    text.parse()
                        .map_err(|_| Error::Format(format!("bad number '{text}'")))?,
                ),
                ColumnKind::Categorical => Cell::Cat(text.to_string()),
            };
            row.push(cell);
        }
        rows.push(row);
    }
    let table = RawTable { dataset: name, columns, rows, sensitive, label };
    table.validate()?;
    Ok(ProcessedTable { variant: variant_tag, table, encoding_map, sensitive_encoding })
}

// ---------------------------------------------------------------------------
// Split plans.
// ---------------------------------------------------------------------------

pub fn write_splits(dirs: &OutDirs, dataset: &str, seed: u64, plans: &[SplitPlan]) -> Result<()> {
    let mut out = String::from("split_id,row_index,partition\n");
    for plan in plans {
        let mut partition = vec!["test"; plan.train_indices.len() + plan.test_indices.len()];
        for &i in &plan.train_indices {
            partition[i] = "train";
        }
        for (row, part) in partition.iter().enumerate() {
            out.push_str(&format!("{},{row},{part}\n", plan.split_id));
        }
    }
    write_atomic(&dirs.splits_csv(dataset, seed), out.as_bytes())
}

pub fn read_splits(dirs: &OutDirs, dataset: &str, seed: u64) -> Result<Vec<SplitPlan>> {
    let path = dirs.splits_csv(dataset, seed);
    let text = std::fs::read_to_string(&path)
        .map_err(|_| Error::Load(format!("split plan '{}' missing", path.display())))?;
    let mut by_split: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!("bad split line '{line}'")));
        }
        let split_id: usize =
            fields[0].parse().map_err(|_| Error::Format("bad split id".into()))?;
        let row: usize =
            fields[1].parse().map_err(|_| Error::Format("bad row index".into()))?;
        let entry = by_split.entry(split_id).or_default();
        match fields[2] {
            "train" => entry.0.push(row),
            "test" => entry.1.push(row),
            other => return Err(Error::Format(format!("bad partition '{other}'"))),
        }
    }
    Ok(by_split
        .into_iter()
        .map(|(split_id, (train, test))| SplitPlan {
            split_id,
            seed: seed ^ split_id as u64,
            train_indices: train,
            test_indices: test,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Predictions and per-cell records.
// ---------------------------------------------------------------------------

pub struct PredictionRows {
    pub row_index: Vec<usize>,
    pub y_true: Vec<u8>,
    pub y_pred: Vec<u8>,
    pub s: Vec<String>,
}

pub fn render_predictions(rows: &PredictionRows) -> String {
    let mut out = String::from("row_index,y_true,y_pred,s\n");
    for i in 0..rows.row_index.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            rows.row_index[i],
            rows.y_true[i],
            rows.y_pred[i],
            csv_escape(&rows.s[i])
        ));
    }
    out
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn read_predictions(path: &Path) -> Result<PredictionRows> {
    let file = std::fs::File::open(path)
        .map_err(|_| Error::Load(format!("prediction file '{}' missing", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut rows = PredictionRows {
        row_index: Vec::new(),
        y_true: Vec::new(),
        y_pred: Vec::new(),
        s: Vec::new(),
    };
    for record in reader.records() {
        let record = record?;
        rows.row_index
            .push(record[0].parse().map_err(|_| Error::Format("bad row index".into()))?);
        rows.y_true.push(record[1].parse().map_err(|_| Error::Format("bad label".into()))?);
        rows.y_pred.push(record[2].parse().map_err(|_| Error::Format("bad label".into()))?);
        rows.s.push(record[3].to_string());
    }
    Ok(rows)
}

/// One benchmark cell's persisted result row.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub run_id: String,
    pub split_id: usize,
    pub param: Option<f64>,
    pub metrics: MetricVector,
}

pub fn results_header() -> String {
    let mut columns = vec!["run_id".to_string(), "split_id".to_string(), "param".to_string()];
    columns.extend(registry());
    columns.join(",")
}

pub fn render_record_row(row: &RecordRow) -> String {
    let mut fields = vec![row.run_id.clone(), row.split_id.to_string(), render_opt(row.param)];
    fields.extend(row.metrics.values().iter().map(|v| render_opt(*v)));
    fields.join(",")
}

pub fn render_results(rows: &[RecordRow]) -> String {
    let mut out = results_header();
    out.push('\n');
    for row in rows {
        out.push_str(&render_record_row(row));
        out.push('\n');
    }
    out
}

pub fn parse_record_line(line: &str) -> Result<RecordRow> {
    let fields: Vec<&str> = line.split(',').collect();
    let expected = 3 + registry().len();
    if fields.len() != expected {
        return Err(Error::Format(format!(
            "record row has {} fields, expected {expected}",
            fields.len()
        )));
    }
    let metrics = MetricVector::from_values(
        fields[3..].iter().map(|f| parse_opt(f)).collect::<Result<Vec<_>>>()?,
    )?;
    Ok(RecordRow {
        run_id: fields[0].to_string(),
        split_id: fields[1].parse().map_err(|_| Error::Format("bad split id".into()))?,
        param: parse_opt(fields[2])?,
        metrics,
    })
}

pub fn write_cell_record(dirs: &OutDirs, row: &RecordRow) -> Result<()> {
    let text = format!("{}\n{}\n", results_header(), render_record_row(row));
    write_atomic(&dirs.cell_csv(&row.run_id), text.as_bytes())
}

pub fn read_cell_record(dirs: &OutDirs, run_id: &str) -> Result<Option<RecordRow>> {
    let path = dirs.cell_csv(run_id);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != results_header() {
        return Err(Error::Format(format!("cell record '{run_id}' has a stale header")));
    }
    let line = lines
        .next()
        .ok_or_else(|| Error::Format(format!("cell record '{run_id}' is empty")))?;
    Ok(Some(parse_record_line(line)?))
}

pub fn read_results(path: &Path) -> Result<Vec<RecordRow>> {
    let text = std::fs::read_to_string(path)
        .map_err(|_| Error::Load(format!("results file '{}' missing", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != results_header() {
                return Err(Error::Format(format!(
                    "results file '{}' has a stale header",
                    path.display()
                )));
            }
            continue;
        }
        rows.push(parse_record_line(line)?);
    }
    Ok(rows)
}
