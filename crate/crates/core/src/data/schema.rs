//! Dataset schemas: which columns exist, what they mean, and how raw files
//! are cleaned into analysis-ready tables.
//!
//! Schemas are written in a flat text format so the cleaning rules for every
//! dataset (filters, value mappings, derived columns) are auditable without
//! reading code. See the repository `schemas/` directory for the shipped ones.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Feature,
    Sensitive,
    Label,
    /// Loaded (filters may reference it) but removed from the final table.
    Drop,
}

/// One raw-file column: its name, value kind, and role in the pipeline.
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
}

/// A sensitive attribute and the category treated as the privileged group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitiveSpec {
    pub column: String,
    pub privileged_value: String,
}

/// A named row predicate applied while loading.
#[derive(Debug, Clone)]
pub struct RowFilter {
    pub name: String,
    pub column: String,
    pub predicate: Predicate,
}

#[derive(Debug, Clone)]
pub enum Predicate {
    /// Numeric value within [lo, hi]; unparseable values fail the filter.
    Between(f64, f64),
    Ne(String),
    Eq(String),
}

/// A registered dataset-specific rewrite applied after filtering.
#[derive(Debug, Clone)]
pub enum Transform {
    /// Replace a numeric column with a two-category discretization.
    Discretize {
        column: String,
        threshold: f64,
        at_or_above: String,
        below: String,
    },
    /// Derive a new categorical column from an existing one via a value map.
    MapColumn {
        new_column: String,
        source: String,
        mapping: Vec<(String, String)>,
    },
    /// Derive a new two-category column by thresholding a numeric one.
    ThresholdColumn {
        new_column: String,
        source: String,
        threshold: f64,
        at_or_above: String,
        below: String,
    },
}

impl Transform {
    /// Name of the column this transform creates, if any.
    pub fn creates(&self) -> Option<&str> {
        match self {
            Transform::Discretize { .. } => None,
            Transform::MapColumn { new_column, .. } => Some(new_column),
            Transform::ThresholdColumn { new_column, .. } => Some(new_column),
        }
    }
}

/// Everything needed to turn one raw delimited file into a validated table.
#[derive(Debug, Clone)]
pub struct DatasetSchema {
    pub name: String,
    /// Raw-file columns in file order; this order is the canonical column order.
    pub columns: Vec<ColumnSpec>,
    pub sensitive: Vec<SensitiveSpec>,
    /// Name of the label column (raw or created by a transform).
    pub label: String,
    pub positive_label: String,
    pub missing_token: String,
    pub row_filters: Vec<RowFilter>,
    pub transforms: Vec<Transform>,
    /// Ignore source columns the schema does not list (for wide raw files).
    pub ignore_unlisted: bool,
}

impl DatasetSchema {
    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Check internal consistency: unique names, label/sensitive resolvable,
    /// filters referencing real columns.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Schema("dataset name is empty".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column '{}'", c.name)));
            }
        }
        let mut known: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        for t in &self.transforms {
            let source = match t {
                Transform::Discretize { column, .. } => column.as_str(),
                Transform::MapColumn { source, .. } => source.as_str(),
                Transform::ThresholdColumn { source, .. } => source.as_str(),
            };
            if !known.contains(&source) {
                return Err(Error::Schema(format!(
                    "transform references absent column '{source}'"
                )));
            }
            if let Some(new) = t.creates() {
                if known.contains(&new) {
                    return Err(Error::Schema(format!(
                        "transform creates column '{new}' which already exists"
                    )));
                }
                known.push(new);
            }
        }
        if self.label.is_empty() {
            return Err(Error::Schema("no label column declared".into()));
        }
        if !known.contains(&self.label.as_str()) {
            return Err(Error::Schema(format!(
                "label column '{}' is neither a raw column nor created by a transform",
                self.label
            )));
        }
        if self.sensitive.is_empty() {
            return Err(Error::Schema("at least one sensitive attribute required".into()));
        }
        for s in &self.sensitive {
            if !known.contains(&s.column.as_str()) {
                return Err(Error::Schema(format!(
                    "sensitive column '{}' is neither a raw column nor created by a transform",
                    s.column
                )));
            }
        }
        for f in &self.row_filters {
            if self.column(&f.column).is_none() {
                return Err(Error::Schema(format!(
                    "filter '{}' references unknown column '{}'",
                    f.name, f.column
                )));
            }
        }
        Ok(())
    }

    /// Role of a column after load: label/sensitive declarations win over the
    /// raw column role.
    pub fn resolved_role(&self, name: &str) -> Role {
        if name == self.label {
            return Role::Label;
        }
        if self.sensitive.iter().any(|s| s.column == name) {
            return Role::Sensitive;
        }
        match self.column(name) {
            Some(c) => c.role,
            None => Role::Feature,
        }
    }

    /// Parse the flat text schema format.
    pub fn parse(text: &str) -> Result<DatasetSchema> {
        let mut name = String::new();
        let mut columns = Vec::new();
        let mut sensitive = Vec::new();
        let mut label = String::new();
        let mut positive_label = String::new();
        let mut missing_token = String::new();
        let mut row_filters = Vec::new();
        let mut transforms = Vec::new();
        let mut ignore_unlisted = false;

        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(':').ok_or_else(|| {
                Error::Format(format!("schema line {}: expected 'key: value'", lineno + 1))
            })?;
            let rest = rest.trim();
            let bad = |msg: &str| Error::Format(format!("schema line {}: {msg}", lineno + 1));
            let toks: Vec<&str> = rest.split_whitespace().collect();
            match key.trim() {
                "name" => name = rest.to_string(),
                "missing" => missing_token = rest.to_string(),
                "label" => label = rest.to_string(),
                "positive" => positive_label = rest.to_string(),
                "unlisted" => {
                    ignore_unlisted = match rest {
                        "ignore" => true,
                        "error" => false,
                        _ => return Err(bad("unlisted must be 'ignore' or 'error'")),
                    }
                }
                "column" => {
                    if toks.len() < 2 || toks.len() > 3 {
                        return Err(bad("column: <name> <categorical|numeric> [drop]"));
                    }
                    let kind = match toks[1] {
                        "categorical" => ColumnKind::Categorical,
                        "numeric" => ColumnKind::Numeric,
                        _ => return Err(bad("column kind must be categorical or numeric")),
                    };
                    let role = match toks.get(2) {
                        None => Role::Feature,
                        Some(&"drop") => Role::Drop,
                        Some(other) => return Err(bad(&format!("unknown column flag '{other}'"))),
                    };
                    columns.push(ColumnSpec { name: toks[0].to_string(), kind, role });
                }
                "sensitive" => {
                    if toks.len() != 2 || !toks[1].starts_with("privileged=") {
                        return Err(bad("sensitive: <column> privileged=<value>"));
                    }
                    sensitive.push(SensitiveSpec {
                        column: toks[0].to_string(),
                        privileged_value: toks[1]["privileged=".len()..].to_string(),
                    });
                }
                "filter" => {
                    // filter: <name> <column> <between lo hi | ne v | eq v>
                    if toks.len() < 4 {
                        return Err(bad("filter: <name> <column> <op> <args>"));
                    }
                    let predicate = match toks[2] {
                        "between" => {
                            if toks.len() != 5 {
                                return Err(bad("between takes two bounds"));
                            }
                            let lo = toks[3].parse().map_err(|_| bad("bad lower bound"))?;
                            let hi = toks[4].parse().map_err(|_| bad("bad upper bound"))?;
                            Predicate::Between(lo, hi)
                        }
                        "ne" => Predicate::Ne(toks[3].to_string()),
                        "eq" => Predicate::Eq(toks[3].to_string()),
                        other => return Err(bad(&format!("unknown filter op '{other}'"))),
                    };
                    row_filters.push(RowFilter {
                        name: toks[0].to_string(),
                        column: toks[1].to_string(),
                        predicate,
                    });
                }
                "discretize" => {
                    // discretize: <column> <threshold> <at-or-above-name> <below-name>
                    if toks.len() != 4 {
                        return Err(bad("discretize: <column> <threshold> <high> <low>"));
                    }
                    transforms.push(Transform::Discretize {
                        column: toks[0].to_string(),
                        threshold: toks[1].parse().map_err(|_| bad("bad threshold"))?,
                        at_or_above: toks[2].to_string(),
                        below: toks[3].to_string(),
                    });
                }
                "derive" => {
                    // derive: <new> from <source> <a=b> <c=d> ...
                    if toks.len() < 4 || toks[1] != "from" {
                        return Err(bad("derive: <new> from <source> <value=mapped>..."));
                    }
                    let mut mapping = Vec::new();
                    for pair in &toks[3..] {
                        let (from, to) = pair
                            .split_once('=')
                            .ok_or_else(|| bad("mapping entries look like value=mapped"))?;
                        mapping.push((from.to_string(), to.to_string()));
                    }
                    transforms.push(Transform::MapColumn {
                        new_column: toks[0].to_string(),
                        source: toks[2].to_string(),
                        mapping,
                    });
                }
                "threshold" => {
                    // threshold: <new> from <source> <cut> <high> <low>
                    if toks.len() != 6 || toks[1] != "from" {
                        return Err(bad("threshold: <new> from <source> <cut> <high> <low>"));
                    }
                    transforms.push(Transform::ThresholdColumn {
                        new_column: toks[0].to_string(),
                        source: toks[2].to_string(),
                        threshold: toks[3].parse().map_err(|_| bad("bad threshold"))?,
                        at_or_above: toks[4].to_string(),
                        below: toks[5].to_string(),
                    });
                }
                other => return Err(bad(&format!("unknown schema key '{other}'"))),
            }
        }

        let schema = DatasetSchema {
            name,
            columns,
            sensitive,
            label,
            positive_label,
            missing_token,
            row_filters,
            transforms,
            ignore_unlisted,
        };
        schema.validate()?;
        Ok(schema)
    }
}
