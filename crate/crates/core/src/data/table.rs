//! In-memory tabular data: validated rows plus working column metadata.

use std::io::Write;

use crate::data::schema::{ColumnKind, Role, SensitiveSpec};
use crate::error::{Error, Result};

/// A single cell: category string or finite real.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Cat(String),
    Num(f64),
}

impl Cell {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Cell::Cat(s) => Some(s),
            Cell::Num(_) => None,
        }
    }

    /// Canonical text form: shortest round-trip decimals for numbers.
    pub fn render(&self) -> String {
        match self {
            Cell::Cat(s) => s.clone(),
            Cell::Num(v) => format!("{v}"),
        }
    }
}

/// Where a working column came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Plain,
    /// One-hot indicator produced from a categorical feature.
    Indicator { source: String, category: String },
    /// Integer-coded copy of a sensitive column.
    SensitiveCode { source: String },
}

/// Working column metadata; starts as a copy of the schema column and is
/// updated by transforms and encodings.
#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
    pub origin: Origin,
}

/// A validated table: no missing values, finite numerics, binary 0/1 label.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub dataset: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub sensitive: Vec<SensitiveSpec>,
    /// Name of the label column; its cells are Num(0.0) or Num(1.0).
    pub label: String,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn col_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::Load(format!("unknown column '{name}'")))
    }

    pub fn label_index(&self) -> Result<usize> {
        self.col_index(&self.label)
    }

    pub fn labels(&self) -> Result<Vec<u8>> {
        let li = self.label_index()?;
        self.rows
            .iter()
            .map(|r| match r[li] {
                Cell::Num(v) if v == 0.0 => Ok(0),
                Cell::Num(v) if v == 1.0 => Ok(1),
                _ => Err(Error::Load("label cell is not 0/1".into())),
            })
            .collect()
    }

    pub fn sensitive_spec(&self, column: &str) -> Result<&SensitiveSpec> {
        self.sensitive
            .iter()
            .find(|s| s.column == column)
            .ok_or_else(|| Error::Load(format!("'{column}' is not a sensitive attribute")))
    }

    /// Distinct values of a categorical column in first-appearance order.
    pub fn categories(&self, col: usize) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for row in &self.rows {
            if let Cell::Cat(s) = &row[col] {
                if !out.iter().any(|c| c == s) {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// Enforce the table invariants.
    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Load(format!("dataset '{}' has no rows", self.dataset)));
        }
        let width = self.columns.len();
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Load(format!("row {i} has {} cells, expected {width}", row.len())));
            }
            for (c, cell) in row.iter().enumerate() {
                if let Cell::Num(v) = cell {
                    if !v.is_finite() {
                        return Err(Error::Load(format!(
                            "non-finite value in column '{}' row {i}",
                            self.columns[c].name
                        )));
                    }
                }
            }
        }
        let li = self.label_index()?;
        for (i, row) in self.rows.iter().enumerate() {
            match row[li] {
                Cell::Num(v) if v == 0.0 || v == 1.0 => {}
                _ => {
                    return Err(Error::Load(format!(
                        "label in row {i} is not binary 0/1 after encoding"
                    )))
                }
            }
        }
        for spec in &self.sensitive {
            let ci = self.col_index(&spec.column)?;
            let seen = self
                .rows
                .iter()
                .any(|r| r[ci].as_cat() == Some(spec.privileged_value.as_str()));
            if !seen {
                return Err(Error::Load(format!(
                    "privileged value '{}' not observed in column '{}'",
                    spec.privileged_value, spec.column
                )));
            }
        }
        Ok(())
    }

    /// Serialize as comma-delimited text: header in column order, shortest
    /// round-trip decimals for numerics.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|_| Error::Format("non-UTF8 csv output".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RawTable {
        RawTable {
            dataset: "t".into(),
            columns: vec![
                Column { name: "x".into(), kind: ColumnKind::Numeric, role: Role::Feature, origin: Origin::Plain },
                Column { name: "g".into(), kind: ColumnKind::Categorical, role: Role::Sensitive, origin: Origin::Plain },
                Column { name: "y".into(), kind: ColumnKind::Categorical, role: Role::Label, origin: Origin::Plain },
            ],
            rows: vec![
                vec![Cell::Num(1.5), Cell::Cat("a".into()), Cell::Num(1.0)],
                vec![Cell::Num(-2.0), Cell::Cat("b".into()), Cell::Num(0.0)],
            ],
            sensitive: vec![SensitiveSpec { column: "g".into(), privileged_value: "a".into() }],
            label: "y".into(),
        }
    }

    #[test]
    fn validates_and_serializes() {
        let t = tiny();
        t.validate().unwrap();
        let csv = t.to_csv_string().unwrap();
        assert_eq!(csv, "x,g,y\n1.5,a,1\n-2,b,0\n");
    }

    #[test]
    fn rejects_unobserved_privileged_value() {
        let mut t = tiny();
        t.sensitive[0].privileged_value = "z".into();
        assert!(t.validate().is_err());
    }

    #[test]
    fn rejects_non_binary_label() {
        let mut t = tiny();
        t.rows[0][2] = Cell::Num(2.0);
        assert!(t.validate().is_err());
    }

    #[test]
    fn categories_in_first_appearance_order() {
        let t = tiny();
        assert_eq!(t.categories(1), vec!["a".to_string(), "b".to_string()]);
    }
}
