//! Built-in dataset registry: schema text, raw file name, default
//! sensitive attributes, and the expected post-cleaning row counts used by
//! the preprocess summary.

use std::path::Path;

use fairbench_core::data::{load_dataset, synth_generate, DatasetSchema, LoadReport, RawTable};
use fairbench_core::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub schema_text: &'static str,
    /// File expected under the data directory.
    pub raw_file: &'static str,
    /// Sensitive attributes benchmarked by default (may include combined
    /// attributes joined with '-').
    pub default_sensitive: &'static [&'static str],
    /// Documented row count after cleaning, when known.
    pub expected_rows: Option<usize>,
}

pub const SYNTH: &str = "synth";

pub fn builtin_datasets() -> &'static [DatasetInfo] {
    &[
        DatasetInfo {
            name: "ricci",
            schema_text: include_str!("../schemas/ricci.schema"),
            raw_file: "ricci.csv",
            default_sensitive: &["Race"],
            expected_rows: Some(118),
        },
        DatasetInfo {
            name: "adult",
            schema_text: include_str!("../schemas/adult.schema"),
            raw_file: "adult.csv",
            default_sensitive: &["race", "sex", "race-sex"],
            expected_rows: Some(30_162),
        },
        DatasetInfo {
            name: "german",
            schema_text: include_str!("../schemas/german.schema"),
            raw_file: "german.csv",
            default_sensitive: &["sex", "age"],
            expected_rows: Some(1_000),
        },
        DatasetInfo {
            name: "propublica-recidivism",
            schema_text: include_str!("../schemas/propublica-recidivism.schema"),
            raw_file: "propublica-recidivism.csv",
            default_sensitive: &["race", "sex"],
            expected_rows: Some(6_167),
        },
        DatasetInfo {
            name: "propublica-violent",
            schema_text: include_str!("../schemas/propublica-violent.schema"),
            raw_file: "propublica-violent.csv",
            default_sensitive: &["race", "sex"],
            expected_rows: Some(4_010),
        },
    ]
}

pub fn dataset_info(name: &str) -> Option<&'static DatasetInfo> {
    builtin_datasets().iter().find(|d| d.name == name)
}

pub fn dataset_schema(name: &str) -> Result<DatasetSchema> {
    let info = dataset_info(name)
        .ok_or_else(|| Error::Load(format!("unknown dataset '{name}'")))?;
    DatasetSchema::parse(info.schema_text)
}

pub fn default_sensitive(name: &str) -> Vec<String> {
    if name == SYNTH {
        return vec![fairbench_core::data::SYNTH_SENSITIVE.to_string()];
    }
    dataset_info(name)
        .map(|d| d.default_sensitive.iter().map(|s| s.to_string()).collect())
        .unwrap_or_default()
}

pub fn known_dataset(name: &str) -> bool {
    name == SYNTH || dataset_info(name).is_some()
}

/// Load one dataset's cleaned table: the synthetic generator for `synth`,
/// otherwise the schema applied to the raw file under `datadir`.
pub fn load_raw(
    name: &str,
    datadir: &Path,
    synth_n: usize,
    synth_bias: f64,
    master_seed: u64,
) -> Result<(RawTable, LoadReport)> {
    if name == SYNTH {
        let table = synth_generate(synth_n, synth_bias, master_seed)?;
        let report = LoadReport {
            initial_rows: synth_n,
            final_rows: synth_n,
            ..Default::default()
        };
        return Ok((table, report));
    }
    let info = dataset_info(name)
        .ok_or_else(|| Error::Load(format!("unknown dataset '{name}'")))?;
    let path = datadir.join(info.raw_file);
    if !path.exists() {
        return Err(Error::Load(format!(
            "raw file '{}' not found; see docs/DATA.md for how to obtain and place it",
            path.display()
        )));
    }
    let schema = DatasetSchema::parse(info.schema_text)?;
    let file = std::fs::File::open(&path)?;
    load_dataset(&schema, std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtin_schemas_parse_and_validate() {
        for info in builtin_datasets() {
            let schema = DatasetSchema::parse(info.schema_text)
                .unwrap_or_else(|e| panic!("{}: {e}", info.name));
            assert_eq!(schema.name, info.name);
            assert!(!schema.sensitive.is_empty());
        }
    }

    #[test]
    fn german_schema_has_twenty_attributes() {
        let schema = dataset_schema("german").unwrap();
        // 20 attributes plus the label column
        assert_eq!(schema.columns.len(), 21);
        assert_eq!(schema.transforms.len(), 2);
    }

    #[test]
    fn missing_raw_file_names_the_docs() {
        let err = load_raw("adult", Path::new("/nonexistent"), 100, 0.1, 1).unwrap_err();
        assert!(err.to_string().contains("DATA.md"), "{err}");
    }

    #[test]
    fn synth_loads_without_files() {
        let (table, report) = load_raw(SYNTH, Path::new("/nonexistent"), 120, 0.4, 7).unwrap();
        assert_eq!(table.n_rows(), 120);
        assert_eq!(report.final_rows, 120);
    }
}
