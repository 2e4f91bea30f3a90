//! The three pipeline stages. Each consumes the previous stage's artifacts
//! from the output directory and writes its own, so stages can run in
//! separate invocations and reruns are byte-identical.


use fairbench_core::analysis::{
    correlation_matrix, stability, tradeoff_points, variant_compare, RectSpec, Series,
};
use fairbench_core::metrics::{registry, MetricVector};
use fairbench_core::preprocess::{
    binarize_sensitive, combine_sensitive, encode_numerical, make_splits, to_original, VariantTag,
};
use fairbench_core::Error;

use crate::algorithms::Algorithm;
use crate::config::{Config, Objective, TRAIN_FRACTION};
use crate::error::{CliError, CliResult};
use crate::persist::{self, OutDirs, RecordRow};
use crate::registry;
use crate::runner::{run_combination, CellContext, StagedDataset};

pub const TRADEOFF_X: &str = "calib_neg_mean";
pub const TRADEOFF_Y: &str = "tpr_mean_avg";
pub const VARIANT_METRICS: [&str; 2] = ["acc", "di_bin"];

fn write_resolved(config: &Config) -> CliResult<()> {
    persist::write_atomic(&config.outdir.join("config.resolved"), config.resolved().as_bytes())?;
    Ok(())
}

/// Add any configured combined sensitive attributes (names like "race-sex")
/// to the cleaned table.
fn add_combined_attributes(
    table: fairbench_core::data::RawTable,
    config: &Config,
    dataset: &str,
) -> CliResult<fairbench_core::data::RawTable> {
    let mut out = table;
    for name in config.sensitive_for(dataset) {
        if out.col_index(&name).is_ok() {
            continue;
        }
        let parts: Vec<&str> = name.split('-').collect();
        if parts.len() < 2 {
            return Err(CliError::Usage(format!(
                "sensitive attribute '{name}' does not exist in dataset '{dataset}'"
            )));
        }
        out = combine_sensitive(&out, &parts)?;
    }
    Ok(out)
}

/// Load, clean, and encode every configured dataset; write the processed
/// variants and split plans.
pub fn cmd_preprocess(config: &Config) -> CliResult<Vec<String>> {
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    write_resolved(config)?;
    let dirs = OutDirs::new(&config.outdir);
    let mut lines = Vec::new();

    for dataset in &config.datasets {
        let (raw, report) = registry::load_raw(
            dataset,
            &config.datadir,
            config.synth_n,
            config.synth_bias,
            config.master_seed,
        )
        .map_err(|e| match e {
            Error::Load(msg) if msg.contains("not found") => CliError::MissingPrereq(msg),
            other => CliError::Core(other),
        })?;
        let raw = add_combined_attributes(raw, config, dataset)?;

        let original = to_original(&raw);
        let numerical = encode_numerical(&raw)?;
        let binary = binarize_sensitive(&numerical)?;
        persist::write_processed(&dirs, &original)?;
        persist::write_processed(&dirs, &numerical)?;
        persist::write_processed(&dirs, &binary)?;

        let splits = make_splits(raw.n_rows(), config.n_splits, TRAIN_FRACTION, config.master_seed)?;
        persist::write_splits(&dirs, dataset, config.master_seed, &splits)?;

        lines.push(format!(
            "{dataset}: {} rows ({} dropped missing, {} filtered), {} variants, {} splits",
            raw.n_rows(),
            report.total_missing_dropped(),
            report.total_filter_dropped(),
            VariantTag::all().len(),
            splits.len(),
        ));
        if let Some(info) = registry::dataset_info(dataset) {
            if let Some(expected) = info.expected_rows {
                if raw.n_rows() != expected {
                    lines.push(format!(
                        "{dataset}: row count {} differs from the documented {expected}; \
                         cleaning breakdown:\n{}",
                        raw.n_rows(),
                        report.describe()
                    ));
                }
            }
        }
    }
    Ok(lines)
}

/// Load staged artifacts for one dataset/variant.
fn load_staged(
    dirs: &OutDirs,
    dataset: &str,
    variant: VariantTag,
    seed: u64,
) -> CliResult<StagedDataset> {
    let table = persist::read_processed(dirs, dataset, variant).map_err(|e| match e {
        Error::Load(msg) => CliError::MissingPrereq(format!(
            "{msg}; run `fairbench preprocess` first"
        )),
        other => CliError::Core(other),
    })?;
    let splits = persist::read_splits(dirs, dataset, seed).map_err(|e| match e {
        Error::Load(msg) => CliError::MissingPrereq(format!(
            "{msg}; run `fairbench preprocess` first"
        )),
        other => CliError::Core(other),
    })?;
    Ok(StagedDataset { dataset: dataset.to_string(), table, splits })
}

/// Execute the benchmark over every configured combination. Returns the
/// summary lines and the number of failed cells.
pub fn cmd_benchmark(config: &Config) -> CliResult<(Vec<String>, usize)> {
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    write_resolved(config)?;
    let dirs = OutDirs::new(&config.outdir);
    let mut lines = Vec::new();
    let mut total_failed = 0;

    for dataset in &config.datasets {
        for variant in &config.variants {
            let staged = load_staged(&dirs, dataset, *variant, config.master_seed)?;
            for sensitive in config.sensitive_for(dataset) {
                if staged.table.table.col_index(&sensitive).is_err() {
                    return Err(CliError::Usage(format!(
                        "sensitive attribute '{sensitive}' not present in dataset '{dataset}'"
                    )));
                }
                for algorithm in &config.algorithms {
                    if let Some(reason) = algorithm.incompatibility(*variant) {
                        lines.push(format!(
                            "skip {dataset}/{}/{sensitive}/{}: {reason}",
                            variant.as_str(),
                            algorithm.name()
                        ));
                        continue;
                    }
                    let ctx = CellContext {
                        staged: &staged,
                        sensitive: &sensitive,
                        algorithm: *algorithm,
                        config,
                    };
                    let outcome = run_combination(&ctx, &dirs)?;
                    total_failed += outcome.failed;
                    lines.push(format!(
                        "{dataset}/{}/{sensitive}/{}: {} cells run, {} reused, {} failed",
                        variant.as_str(),
                        algorithm.name(),
                        outcome.executed,
                        outcome.reused,
                        outcome.failed
                    ));
                }
            }
        }
    }
    Ok((lines, total_failed))
}

/// Records of one (dataset, variant, sensitive) read back from results files,
/// grouped per algorithm in configuration order.
fn load_records(
    config: &Config,
    dirs: &OutDirs,
    dataset: &str,
    variant: VariantTag,
    sensitive: &str,
) -> Vec<(Algorithm, Vec<RecordRow>)> {
    let mut out = Vec::new();
    for algorithm in &config.algorithms {
        if algorithm.incompatibility(variant).is_some() {
            continue;
        }
        let path = dirs.results_csv(dataset, variant, sensitive, algorithm.name());
        if let Ok(rows) = persist::read_results(&path) {
            out.push((*algorithm, rows));
        }
    }
    out
}

/// Rows carrying the algorithm's untuned default parameter (all rows when a
/// tuning objective selected parameters per split).
fn default_param_rows<'a>(
    algorithm: &Algorithm,
    rows: &'a [RecordRow],
    objective: Objective,
) -> Vec<&'a RecordRow> {
    match (objective, algorithm.default_param()) {
        (Objective::ReportAll, Some(default)) => {
            rows.iter().filter(|r| r.param == Some(default)).collect()
        }
        _ => rows.iter().collect(),
    }
}

fn defined_pair(v: &MetricVector, x: &str, y: &str) -> Option<(f64, f64)> {
    Some((v.get(x)?, v.get(y)?))
}

/// Stability, correlation, tradeoff, and variant-comparison outputs.
pub fn cmd_analyze(config: &Config) -> CliResult<Vec<String>> {
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    write_resolved(config)?;
    let dirs = OutDirs::new(&config.outdir);
    let mut lines = Vec::new();
    let mut anything = false;

    for dataset in &config.datasets {
        let sensitive_attrs = config.sensitive_for(dataset);
        let Some(sensitive) = sensitive_attrs.first() else {
            continue;
        };
        // Synthesis runs on the binary variant, where every algorithm is
        // comparable.
        let variant = VariantTag::NumericalBinary;
        let per_algorithm = load_records(config, &dirs, dataset, variant, sensitive);
        if per_algorithm.is_empty() {
            lines.push(format!("{dataset}: no records found"));
            continue;
        }
        anything = true;

        // Stability over splits at each algorithm's default parameter.
        let mut stability_input: Vec<(String, MetricVector)> = Vec::new();
        for (algorithm, rows) in &per_algorithm {
            for row in default_param_rows(algorithm, rows, config.objective) {
                stability_input.push((algorithm.name().to_string(), row.metrics.clone()));
            }
        }
        let summaries = stability(&stability_input);
        let mut csv = String::from("algorithm,metric,mean,std,n\n");
        for s in &summaries {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                s.algorithm,
                s.metric,
                persist::render_opt(s.mean),
                persist::render_opt(s.std),
                s.n
            ));
        }
        persist::write_atomic(
            &dirs.analysis().join(format!("stability_{dataset}.csv")),
            csv.as_bytes(),
        )?;

        // Stability rectangles in the (di_bin, acc) plane.
        let mut rect_series = Vec::new();
        for (algorithm, rows) in &per_algorithm {
            let points: Vec<(f64, f64)> = default_param_rows(algorithm, rows, config.objective)
                .iter()
                .filter_map(|r| defined_pair(&r.metrics, "di_bin", "acc"))
                .collect();
            let cell = |metric: &str| {
                summaries
                    .iter()
                    .find(|s| s.algorithm == algorithm.name() && s.metric == metric)
                    .and_then(|s| s.mean.map(|m| (m, s.std.unwrap_or(0.0))))
            };
            let rect = match (cell("di_bin"), cell("acc")) {
                (Some((mx, sx)), Some((my, sy))) => {
                    Some(RectSpec { center: (mx, my), width: sx, height: sy })
                }
                _ => None,
            };
            if !points.is_empty() || rect.is_some() {
                rect_series.push(Series { label: algorithm.name().to_string(), points, rect });
            }
        }
        if !rect_series.is_empty() {
            fairbench_core::analysis::emit_scatter_svg(
                &rect_series,
                "di_bin",
                "acc",
                &dirs.analysis().join(format!("stability_{dataset}.svg")),
            )?;
        }

        // Robust correlation per algorithm over all (split, param) records.
        for (algorithm, rows) in &per_algorithm {
            let vectors: Vec<MetricVector> = rows.iter().map(|r| r.metrics.clone()).collect();
            if vectors.len() < 3 {
                continue;
            }
            let matrix = correlation_matrix(&vectors, config.master_seed)?;
            let mut csv = String::from("metric,");
            csv.push_str(&matrix.names.join(","));
            csv.push('\n');
            for (i, name) in matrix.names.iter().enumerate() {
                let cells: Vec<String> =
                    matrix.entries[i].iter().map(|v| persist::render_opt(*v)).collect();
                csv.push_str(&format!("{name},{}\n", cells.join(",")));
            }
            persist::write_atomic(
                &dirs
                    .analysis()
                    .join(format!("correlation_{dataset}_{}.csv", algorithm.name())),
                csv.as_bytes(),
            )?;
        }

        // Tradeoff plane: one point per split per algorithm.
        let mut tradeoff_csv = format!("algorithm,run_id,{TRADEOFF_X},{TRADEOFF_Y}\n");
        let mut tradeoff_series = Vec::new();
        for (algorithm, rows) in &per_algorithm {
            let records: Vec<(String, MetricVector)> =
                default_param_rows(algorithm, rows, config.objective)
                    .iter()
                    .map(|r| (r.run_id.clone(), r.metrics.clone()))
                    .collect();
            let points = tradeoff_points(&records, TRADEOFF_X, TRADEOFF_Y);
            for p in &points {
                tradeoff_csv.push_str(&format!(
                    "{},{},{},{}\n",
                    algorithm.name(),
                    p.run_id,
                    p.x,
                    p.y
                ));
            }
            if !points.is_empty() {
                tradeoff_series.push(Series {
                    label: algorithm.name().to_string(),
                    points: points.iter().map(|p| (p.x, p.y)).collect(),
                    rect: None,
                });
            }
        }
        persist::write_atomic(
            &dirs
                .analysis()
                .join(format!("tradeoff_{dataset}_{TRADEOFF_X}_{TRADEOFF_Y}.csv")),
            tradeoff_csv.as_bytes(),
        )?;
        if !tradeoff_series.is_empty() {
            fairbench_core::analysis::emit_scatter_svg(
                &tradeoff_series,
                TRADEOFF_X,
                TRADEOFF_Y,
                &dirs
                    .analysis()
                    .join(format!("tradeoff_{dataset}_{TRADEOFF_X}_{TRADEOFF_Y}.svg")),
            )?;
        }

        // Variant comparison: numerical vs numerical_binary, matched splits.
        if config.variants.contains(&VariantTag::Numerical)
            && config.variants.contains(&VariantTag::NumericalBinary)
        {
            let numerical = load_records(config, &dirs, dataset, VariantTag::Numerical, sensitive);
            for metric in VARIANT_METRICS {
                let mut csv = String::from("algorithm,split_id,numerical,numerical_binary\n");
                let mut series = Vec::new();
                for (algorithm, bin_rows) in &per_algorithm {
                    let Some((_, num_rows)) =
                        numerical.iter().find(|(a, _)| a.name() == algorithm.name())
                    else {
                        continue;
                    };
                    let project = |rows: &[RecordRow]| -> Vec<(usize, MetricVector)> {
                        default_param_rows(algorithm, rows, config.objective)
                            .iter()
                            .map(|r| (r.split_id, r.metrics.clone()))
                            .collect()
                    };
                    let a = project(num_rows);
                    let b = project(bin_rows);
                    if a.len() != b.len() || a.is_empty() {
                        continue;
                    }
                    let pairs = variant_compare(&a, &b, metric)?;
                    for p in &pairs {
                        csv.push_str(&format!(
                            "{},{},{},{}\n",
                            algorithm.name(),
                            p.split_id,
                            p.a,
                            p.b
                        ));
                    }
                    if !pairs.is_empty() {
                        series.push(Series {
                            label: algorithm.name().to_string(),
                            points: pairs.iter().map(|p| (p.a, p.b)).collect(),
                            rect: None,
                        });
                    }
                }
                persist::write_atomic(
                    &dirs.analysis().join(format!("variants_{dataset}_{metric}.csv")),
                    csv.as_bytes(),
                )?;
                if !series.is_empty() {
                    fairbench_core::analysis::emit_scatter_svg(
                        &series,
                        &format!("{metric} (numerical)"),
                        &format!("{metric} (numerical_binary)"),
                        &dirs.analysis().join(format!("variants_{dataset}_{metric}.svg")),
                    )?;
                }
            }
        }
        lines.push(format!(
            "{dataset}: stability over {} algorithms, {} metrics",
            per_algorithm.len(),
            registry().len()
        ));
    }

    if !anything {
        return Err(CliError::MissingPrereq(
            "no benchmark records found; run `fairbench benchmark` first".into(),
        ));
    }
    Ok(lines)
}
