//! Dataset-specific rewrites registered in the schema: discretizations,
//! derived columns, and threshold labels.

use crate::data::schema::{ColumnKind, Role, Transform};
use crate::data::table::{Cell, Column, Origin, RawTable};
use crate::error::{Error, Result};

/// Apply every registered transform, returning a fresh table.
///
/// Transforms are idempotent: re-applying them to an already-transformed
/// table is a no-op, which keeps `load_dataset` idempotent on its own
/// serialized output.
pub fn apply_dataset_transforms(table: &RawTable, transforms: &[Transform]) -> Result<RawTable> {
    let mut out = table.clone();
    for t in transforms {
        apply_one(&mut out, t)?;
    }
    Ok(out)
}

fn apply_one(table: &mut RawTable, t: &Transform) -> Result<()> {
    match t {
        Transform::Discretize { column, threshold, at_or_above, below } => {
            let ci = table
                .col_index(column)
                .map_err(|_| Error::Load(format!("transform references absent column '{column}'")))?;
            if table.columns[ci].kind == ColumnKind::Categorical {
                // Already discretized.
                return Ok(());
            }
            for row in &mut table.rows {
                let v = row[ci]
                    .as_num()
                    .ok_or_else(|| Error::Load(format!("non-numeric cell in '{column}'")))?;
                let cat = if v >= *threshold { at_or_above } else { below };
                row[ci] = Cell::Cat(cat.clone());
            }
            table.columns[ci].kind = ColumnKind::Categorical;
        }
        Transform::MapColumn { new_column, source, mapping } => {
            if table.col_index(new_column).is_ok() {
                return Ok(());
            }
            let si = table
                .col_index(source)
                .map_err(|_| Error::Load(format!("transform references absent column '{source}'")))?;
            let mut values = Vec::with_capacity(table.rows.len());
            for row in &table.rows {
                let v = row[si]
                    .as_cat()
                    .ok_or_else(|| Error::Load(format!("non-categorical cell in '{source}'")))?;
                let mapped = mapping
                    .iter()
                    .find(|(from, _)| from == v)
                    .map(|(_, to)| to.clone())
                    .ok_or_else(|| {
                        Error::Load(format!("value '{v}' of '{source}' has no mapping for '{new_column}'"))
                    })?;
                values.push(Cell::Cat(mapped));
            }
            table.columns.push(Column {
                name: new_column.clone(),
                kind: ColumnKind::Categorical,
                role: Role::Feature, // refined by the loader from the schema
                origin: Origin::Plain,
            });
            for (row, v) in table.rows.iter_mut().zip(values) {
                row.push(v);
            }
        }
        Transform::ThresholdColumn { new_column, source, threshold, at_or_above, below } => {
            if table.col_index(new_column).is_ok() {
                return Ok(());
            }
            let si = table
                .col_index(source)
                .map_err(|_| Error::Load(format!("transform references absent column '{source}'")))?;
            let mut values = Vec::with_capacity(table.rows.len());
            for row in &table.rows {
                let v = row[si]
                    .as_num()
                    .ok_or_else(|| Error::Load(format!("non-numeric cell in '{source}'")))?;
                let cat = if v >= *threshold { at_or_above } else { below };
                values.push(Cell::Cat(cat.clone()));
            }
            table.columns.push(Column {
                name: new_column.clone(),
                kind: ColumnKind::Categorical,
                role: Role::Feature,
                origin: Origin::Plain,
            });
            for (row, v) in table.rows.iter_mut().zip(values) {
                row.push(v);
            }
        }
    }
    Ok(())
}
