//! Pipeline configuration: a flat text file plus command-line overrides
//! (flags win). The resolved snapshot is written into the output directory
//! so every run carries its exact settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fairbench_core::learners::LearnerKind;
use fairbench_core::preprocess::VariantTag;
use fairbench_core::{Error, Result};

use crate::algorithms::Algorithm;
use crate::registry;

pub const DEFAULT_SPLITS: usize = 10;
pub const DEFAULT_SEED: u64 = 42;
pub const TRAIN_FRACTION: f64 = 2.0 / 3.0;
pub const OUTDIR_ENV: &str = "FAIRBENCH_OUTDIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    ReportAll,
    BestAccuracy,
    BestDi,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::ReportAll => "report_all",
            Objective::BestAccuracy => "best_accuracy",
            Objective::BestDi => "best_di",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "report_all" => Ok(Objective::ReportAll),
            "best_accuracy" => Ok(Objective::BestAccuracy),
            "best_di" => Ok(Objective::BestDi),
            other => Err(Error::Format(format!("unknown objective '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub outdir: PathBuf,
    pub datadir: PathBuf,
    pub datasets: Vec<String>,
    /// Variants the benchmark stage runs on (preprocess always writes all).
    pub variants: Vec<VariantTag>,
    pub algorithms: Vec<Algorithm>,
    /// Per-dataset sensitive attributes; empty entry means registry default.
    pub sensitive: BTreeMap<String, Vec<String>>,
    pub n_splits: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub objective: Objective,
    /// Baselines see the sensitive code columns as features.
    pub sensitive_as_feature: bool,
    /// Learner trained on repaired data.
    pub repair_base: LearnerKind,
    /// Repair one-hot indicator columns too.
    pub repair_indicators: bool,
    pub synth_n: usize,
    pub synth_bias: f64,
    /// Per-algorithm parameter grid overrides.
    pub grids: BTreeMap<String, Vec<f64>>,
    /// Learner hyperparameter overrides, keyed `<learner>.<key>`.
    pub hypers: BTreeMap<String, f64>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            outdir: PathBuf::from("out"),
            datadir: PathBuf::from("data"),
            datasets: registry::builtin_datasets().iter().map(|d| d.name.to_string()).collect(),
            variants: vec![VariantTag::Numerical, VariantTag::NumericalBinary],
            algorithms: Algorithm::default_list(),
            sensitive: BTreeMap::new(),
            n_splits: DEFAULT_SPLITS,
            master_seed: DEFAULT_SEED,
            workers: 4,
            objective: Objective::ReportAll,
            sensitive_as_feature: true,
            repair_base: LearnerKind::Logreg,
            repair_indicators: false,
            synth_n: 2000,
            synth_bias: 0.4,
            grids: BTreeMap::new(),
            hypers: BTreeMap::new(),
        }
    }
}

impl Config {
    /// Sensitive attributes benchmarked for one dataset.
    pub fn sensitive_for(&self, dataset: &str) -> Vec<String> {
        match self.sensitive.get(dataset) {
            Some(list) if !list.is_empty() => list.clone(),
            _ => registry::default_sensitive(dataset),
        }
    }

    pub fn grid_for(&self, algorithm: &Algorithm) -> Vec<Option<f64>> {
        match algorithm {
            Algorithm::Baseline(_) => vec![None],
            Algorithm::Intervention(kind) => {
                let grid = self
                    .grids
                    .get(kind.as_str())
                    .cloned()
                    .unwrap_or_else(|| kind.default_grid());
                grid.into_iter().map(Some).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Format("no datasets configured".into()));
        }
        for d in &self.datasets {
            if !registry::known_dataset(d) {
                return Err(Error::Format(format!("unknown dataset '{d}'")));
            }
        }
        if self.n_splits == 0 {
            return Err(Error::Format("splits must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Format("workers must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.synth_bias) {
            return Err(Error::Format("synth_bias must lie in [0,1]".into()));
        }
        Ok(())
    }

    /// Parse the flat `key: value` config format.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once(':').ok_or_else(|| {
                Error::Format(format!("config line {}: expected 'key: value'", lineno + 1))
            })?;
            self.apply_key(key.trim(), value.trim())
                .map_err(|e| Error::Format(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_key(&mut self, key: &str, value: &str) -> Result<()> {
        let list = |v: &str| -> Vec<String> {
            v.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
        };
        let bad_num = |k: &str| Error::Format(format!("bad number for '{k}'"));
        match key {
            "outdir" => self.outdir = PathBuf::from(value),
            "datadir" => self.datadir = PathBuf::from(value),
            "datasets" => self.datasets = list(value),
            "variants" => {
                self.variants = list(value)
                    .iter()
                    .map(|v| VariantTag::parse(v))
                    .collect::<Result<Vec<_>>>()?;
            }
            "algorithms" => {
                self.algorithms = list(value)
                    .iter()
                    .map(|a| Algorithm::parse(a))
                    .collect::<Result<Vec<_>>>()?;
            }
            "splits" => self.n_splits = value.parse().map_err(|_| bad_num(key))?,
            "seed" => self.master_seed = value.parse().map_err(|_| bad_num(key))?,
            "workers" => self.workers = value.parse().map_err(|_| bad_num(key))?,
            "objective" => self.objective = Objective::parse(value)?,
            "sensitive_as_feature" => {
                self.sensitive_as_feature = parse_bool(value)?;
            }
            "repair_base" => self.repair_base = LearnerKind::parse(value)?,
            "repair_indicators" => self.repair_indicators = parse_bool(value)?,
            "synth_n" => self.synth_n = value.parse().map_err(|_| bad_num(key))?,
            "synth_bias" => self.synth_bias = value.parse().map_err(|_| bad_num(key))?,
            _ => {
                if let Some(dataset) = key.strip_prefix("sensitive.") {
                    self.sensitive.insert(dataset.to_string(), list(value));
                } else if let Some(alg) = key.strip_prefix("grid.") {
                    let grid: Vec<f64> = list(value)
                        .iter()
                        .map(|t| t.parse::<f64>().map_err(|_| bad_num(key)))
                        .collect::<Result<Vec<_>>>()?;
                    self.grids.insert(alg.to_string(), grid);
                } else if let Some(rest) = key.strip_prefix("hyper.") {
                    let v: f64 = value.parse().map_err(|_| bad_num(key))?;
                    self.hypers.insert(rest.to_string(), v);
                } else {
                    return Err(Error::Format(format!("unknown config key '{key}'")));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Config> {
        let mut config = Config::default();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read config '{}': {e}", path.display())))?;
        config.apply_file(&text)?;
        Ok(config)
    }

    /// Canonical snapshot of every effective setting.
    pub fn resolved(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("outdir: {}\n", self.outdir.display()));
        out.push_str(&format!("datadir: {}\n", self.datadir.display()));
        out.push_str(&format!("datasets: {}\n", self.datasets.join(",")));
        out.push_str(&format!(
            "variants: {}\n",
            self.variants.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(",")
        ));
        out.push_str(&format!(
            "algorithms: {}\n",
            self.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(",")
        ));
        for dataset in &self.datasets {
            out.push_str(&format!(
                "sensitive.{dataset}: {}\n",
                self.sensitive_for(dataset).join(",")
            ));
        }
        out.push_str(&format!("splits: {}\n", self.n_splits));
        out.push_str(&format!("seed: {}\n", self.master_seed));
        out.push_str(&format!("workers: {}\n", self.workers));
        out.push_str(&format!("objective: {}\n", self.objective.as_str()));
        out.push_str(&format!("sensitive_as_feature: {}\n", self.sensitive_as_feature));
        out.push_str(&format!("repair_base: {}\n", self.repair_base.as_str()));
        out.push_str(&format!("repair_indicators: {}\n", self.repair_indicators));
        out.push_str(&format!("synth_n: {}\n", self.synth_n));
        out.push_str(&format!("synth_bias: {}\n", self.synth_bias));
        for (alg, grid) in &self.grids {
            let rendered: Vec<String> = grid.iter().map(|v| format!("{v}")).collect();
            out.push_str(&format!("grid.{alg}: {}\n", rendered.join(",")));
        }
        for (key, v) in &self.hypers {
            out.push_str(&format!("hyper.{key}: {v}\n"));
        }
        out
    }

    /// Learner hyperparameters for one learner kind.
    pub fn hyper_for(&self, kind: LearnerKind) -> fairbench_core::learners::Hyper {
        let mut hyper = fairbench_core::learners::Hyper::new();
        let prefix = format!("{}.", kind.as_str());
        for (key, value) in &self.hypers {
            if let Some(name) = key.strip_prefix(&prefix) {
                hyper = hyper.set(name, *value);
            }
        }
        hyper
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Format(format!("expected a boolean, got '{other}'"))),
    }
}
