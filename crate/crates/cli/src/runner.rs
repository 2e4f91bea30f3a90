//! Benchmark execution: enumerate (split, parameter) cells, run each one
//! against staged artifacts, persist every result, and assemble the
//! per-combination results file. Cells are independent, so a fixed-size
//! worker pool runs them in any order; outputs are byte-identical for any
//! worker count because every artifact is keyed and ordered by cell.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use fairbench_core::interventions::{
    fit_prejudice_remover, fit_two_naive_bayes, fit_zafar, repair_disparate_impact, FittedModel,
    InterventionKind, InterventionSpec,
};
use fairbench_core::learners;
use fairbench_core::metrics::{full_metric_vector, MetricVector, PredictionSet};
use fairbench_core::preprocess::{make_splits, ProcessedTable, SplitPlan, VariantTag};
use fairbench_core::{Error, Result};

use crate::algorithms::Algorithm;
use crate::config::{Config, Objective, TRAIN_FRACTION};
use crate::persist::{self, OutDirs, PredictionRows, RecordRow};

/// A dataset variant plus its split plans, loaded from stage artifacts.
#[derive(Debug, Clone)]
pub struct StagedDataset {
    pub dataset: String,
    pub table: ProcessedTable,
    pub splits: Vec<SplitPlan>,
}

impl StagedDataset {
    pub fn variant(&self) -> VariantTag {
        self.table.variant
    }
}

/// One executed cell: identity, parameters, and the full measure vector.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run_id: String,
    pub dataset: String,
    pub variant: VariantTag,
    pub sensitive: String,
    pub algorithm: String,
    pub split_id: usize,
    pub param: Option<f64>,
    pub metrics: MetricVector,
    pub wall_time: f64,
}

impl RunRecord {
    pub fn to_row(&self) -> RecordRow {
        RecordRow {
            run_id: self.run_id.clone(),
            split_id: self.split_id,
            param: self.param,
            metrics: self.metrics.clone(),
        }
    }
}

/// Stable content hash identifying one cell.
pub fn run_id(
    dataset: &str,
    variant: VariantTag,
    sensitive: &str,
    algorithm: &str,
    param: Option<f64>,
    split_seed: u64,
) -> String {
    let param_text = match param {
        Some(p) => format!("{p}"),
        None => "-".to_string(),
    };
    let payload = format!(
        "{dataset}|{}|{sensitive}|{algorithm}|{param_text}|{split_seed}",
        variant.as_str()
    );
    let digest = Sha256::digest(payload.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Cartesian product of splits and grid parameters, split-major.
pub fn enumerate_cells(
    splits: &[SplitPlan],
    grid: &[Option<f64>],
) -> Result<Vec<(usize, Option<f64>)>> {
    if grid.is_empty() {
        return Err(Error::Train("empty parameter grid".into()));
    }
    let mut cells = Vec::with_capacity(splits.len() * grid.len());
    for split in splits {
        for param in grid {
            cells.push((split.split_id, *param));
        }
    }
    Ok(cells)
}

/// Everything a cell needs besides its (split, param) coordinates.
pub struct CellContext<'a> {
    pub staged: &'a StagedDataset,
    pub sensitive: &'a str,
    pub algorithm: Algorithm,
    pub config: &'a Config,
}

impl CellContext<'_> {
    fn intervention_l2(&self, kind: InterventionKind) -> f64 {
        self.config
            .hypers
            .get(&format!("{}.l2", kind.as_str()))
            .copied()
            .unwrap_or(1e-4)
    }

    /// Train on `train_rows`, predict `eval_rows`; shared by real cells and
    /// validation subcells.
    fn fit_and_predict(
        &self,
        train_rows: &[usize],
        eval_rows: &[usize],
        param: Option<f64>,
    ) -> Result<(Vec<u8>, FittedModel)> {
        let table = &self.staged.table;

        // The repair happens on the whole table (it never reads labels), so
        // train and test rows land in one coherent repaired feature space.
        let repaired_holder;
        let (effective, repaired_columns): (&ProcessedTable, Vec<String>) = match self.algorithm {
            Algorithm::Intervention(InterventionKind::DiRemover) => {
                let amount = param.ok_or_else(|| Error::Train("repair needs a parameter".into()))?;
                let repaired = repair_disparate_impact(
                    table,
                    self.sensitive,
                    amount,
                    self.config.repair_indicators,
                )?;
                repaired_holder = repaired;
                (&repaired_holder.table, repaired_holder.repaired_columns.clone())
            }
            _ => (table, Vec::new()),
        };

        // Baselines may see the sensitive code columns; interventions never
        // do (they receive the sensitive attribute separately).
        let include_codes = match self.algorithm {
            Algorithm::Baseline(_) => self.config.sensitive_as_feature,
            Algorithm::Intervention(_) => false,
        };
        let cols = effective.feature_column_indices(include_codes);
        let x_train = effective.matrix(train_rows, &cols)?;
        let y_train = effective.labels_for(train_rows)?;
        let x_eval = effective.matrix(eval_rows, &cols)?;
        if !y_train.contains(&0) || !y_train.contains(&1) {
            return Err(Error::Train("training split contains a single class".into()));
        }

        let model = match self.algorithm {
            Algorithm::Baseline(kind) => FittedModel::Baseline(learners::fit(
                kind,
                &x_train,
                &y_train,
                &self.config.hyper_for(kind),
            )?),
            Algorithm::Intervention(InterventionKind::DiRemover) => {
                let base_kind = self.config.repair_base;
                let base = learners::fit(
                    base_kind,
                    &x_train,
                    &y_train,
                    &self.config.hyper_for(base_kind),
                )?;
                let mut spec =
                    InterventionSpec::new(InterventionKind::DiRemover, param.unwrap_or(1.0));
                spec.base_learner = Some(base_kind);
                FittedModel::Repaired { base, spec, repaired_columns }
            }
            Algorithm::Intervention(kind) => {
                let parameter =
                    param.ok_or_else(|| Error::Train("intervention needs a parameter".into()))?;
                let spec = InterventionSpec { l2: self.intervention_l2(kind), ..InterventionSpec::new(kind, parameter) };
                spec.validate()?;
                let s_train = effective.sensitive_binary_codes(self.sensitive, train_rows)?;
                if !s_train.contains(&0) || !s_train.contains(&1) {
                    return Err(Error::Train("training split lost one sensitive group".into()));
                }
                match kind {
                    InterventionKind::TwoNb => FittedModel::TwoNb {
                        model: fit_two_naive_bayes(&x_train, &s_train, &y_train, parameter)?,
                        spec,
                    },
                    InterventionKind::PrejudiceRemover => FittedModel::Prejudice {
                        model: fit_prejudice_remover(
                            &x_train, &s_train, &y_train, parameter, spec.l2,
                        )?,
                        spec,
                    },
                    InterventionKind::Zafar => FittedModel::Zafar {
                        model: fit_zafar(&x_train, &s_train, &y_train, parameter, spec.l2)?,
                        spec,
                    },
                    InterventionKind::DiRemover => unreachable!("handled above"),
                }
            }
        };

        let eval_codes = match self.algorithm {
            Algorithm::Intervention(kind) if kind.requires_binary_sensitive() => {
                Some(effective.sensitive_binary_codes(self.sensitive, eval_rows)?)
            }
            _ => None,
        };
        let predictions = model.predict(&x_eval, eval_codes.as_deref())?;
        Ok((predictions, model))
    }

    fn evaluate(&self, rows: &[usize], predictions: &[u8]) -> Result<MetricVector> {
        let table = &self.staged.table;
        let y_true = table.labels_for(rows)?;
        let s = table.sensitive_values(self.sensitive, rows)?;
        let privileged = table.table.sensitive_spec(self.sensitive)?.privileged_value.clone();
        let set = PredictionSet::new(y_true, predictions.to_vec(), &s, &privileged)?;
        Ok(full_metric_vector(&set))
    }
}

/// Run one cell end to end and persist its artifacts before returning.
pub fn execute_cell(
    ctx: &CellContext,
    dirs: &OutDirs,
    split: &SplitPlan,
    param: Option<f64>,
) -> Result<RunRecord> {
    let started = std::time::Instant::now();
    let id = run_id(
        &ctx.staged.dataset,
        ctx.staged.variant(),
        ctx.sensitive,
        ctx.algorithm.name(),
        param,
        split.seed,
    );
    let (predictions, model) =
        ctx.fit_and_predict(&split.train_indices, &split.test_indices, param)?;
    let metrics = ctx.evaluate(&split.test_indices, &predictions)?;

    let table = &ctx.staged.table;
    let prediction_rows = PredictionRows {
        row_index: split.test_indices.clone(),
        y_true: table.labels_for(&split.test_indices)?,
        y_pred: predictions,
        s: table.sensitive_values(ctx.sensitive, &split.test_indices)?,
    };
    persist::write_atomic(
        &dirs.prediction_csv(&id),
        persist::render_predictions(&prediction_rows).as_bytes(),
    )?;
    persist::write_atomic(&dirs.model_file(&id), model.to_text().as_bytes())?;

    let record = RunRecord {
        run_id: id,
        dataset: ctx.staged.dataset.clone(),
        variant: ctx.staged.variant(),
        sensitive: ctx.sensitive.to_string(),
        algorithm: ctx.algorithm.name().to_string(),
        split_id: split.split_id,
        param,
        metrics,
        wall_time: started.elapsed().as_secs_f64(),
    };
    persist::write_cell_record(dirs, &record.to_row())?;
    Ok(record)
}

/// Pick the winning parameter from one split's validation records: highest
/// validation accuracy, or disparate impact closest to 1. Undefined
/// objective values rank last; ties go to the smaller parameter.
pub fn select_param(records: &[RunRecord], objective: Objective) -> Result<Option<f64>> {
    if records.is_empty() {
        return Err(Error::Train("no successful parameters to select from".into()));
    }
    let score = |r: &RunRecord| -> f64 {
        match objective {
            Objective::BestAccuracy => r.metrics.get("acc").unwrap_or(f64::NEG_INFINITY),
            Objective::BestDi => match r.metrics.get("di_bin") {
                Some(di) => -(di - 1.0).abs(),
                None => f64::NEG_INFINITY,
            },
            Objective::ReportAll => f64::NAN,
        }
    };
    if objective == Objective::ReportAll {
        return Err(Error::Train("report_all does not select parameters".into()));
    }
    let mut ordered: Vec<&RunRecord> = records.iter().collect();
    ordered.sort_by(|a, b| {
        a.param
            .unwrap_or(f64::NEG_INFINITY)
            .partial_cmp(&b.param.unwrap_or(f64::NEG_INFINITY))
            .expect("finite params")
    });
    let mut best = ordered[0];
    for candidate in &ordered[1..] {
        if score(candidate) > score(best) {
            best = candidate;
        }
    }
    Ok(best.param)
}

/// Seed for the nested validation subsplit: shared by every parameter of a
/// split so candidates are compared on the same validation rows.
fn selection_seed(ctx: &CellContext, split: &SplitPlan) -> u64 {
    let payload = format!(
        "{}|{}|{}|{}|{}|selection",
        ctx.staged.dataset,
        ctx.staged.variant().as_str(),
        ctx.sensitive,
        ctx.algorithm.name(),
        split.seed
    );
    let digest = Sha256::digest(payload.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Outcome of one benchmark combination.
#[derive(Debug, Clone, Default)]
pub struct BenchOutcome {
    pub executed: usize,
    pub reused: usize,
    pub failed: usize,
}

enum CellResult {
    Done(RecordRow),
    Failed { run_id: String, split_id: usize, param: Option<f64> },
}

/// Run every cell of (dataset, variant, sensitive, algorithm) and write the
/// combination's results file. Existing per-cell records are reused, which
/// makes interrupted runs resumable.
pub fn run_combination(
    ctx: &CellContext,
    dirs: &OutDirs,
) -> Result<BenchOutcome> {
    let grid = ctx.config.grid_for(&ctx.algorithm);
    let work: Vec<(usize, Option<f64>)> = match ctx.config.objective {
        Objective::ReportAll => enumerate_cells(&ctx.staged.splits, &grid)?,
        // One tuned cell per split; the parameter is chosen per work item.
        Objective::BestAccuracy | Objective::BestDi => {
            ctx.staged.splits.iter().map(|s| (s.split_id, None)).collect()
        }
    };

    let outcome = Mutex::new(BenchOutcome::default());
    let results: Mutex<Vec<Option<CellResult>>> = Mutex::new((0..work.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);

    let run_item = |item_index: usize| -> Result<()> {
        let (split_id, param) = work[item_index];
        let split = ctx
            .staged
            .splits
            .iter()
            .find(|s| s.split_id == split_id)
            .expect("split ids come from the plan list");
        let cell_param = match ctx.config.objective {
            Objective::ReportAll => param,
            _ => match tuned_param(ctx, dirs, split)? {
                Some(p) => p,
                None => {
                    // every candidate failed for this split
                    let id = run_id(
                        &ctx.staged.dataset,
                        ctx.staged.variant(),
                        ctx.sensitive,
                        ctx.algorithm.name(),
                        None,
                        split.seed,
                    );
                    let msg = "all parameter candidates failed in validation".to_string();
                    persist::write_atomic(&dirs.cell_failed(&id), msg.as_bytes())?;
                    let mut out = outcome.lock().expect("lock");
                    out.failed += 1;
                    results.lock().expect("lock")[item_index] =
                        Some(CellResult::Failed { run_id: id, split_id, param: None });
                    return Ok(());
                }
            },
        };
        let id = run_id(
            &ctx.staged.dataset,
            ctx.staged.variant(),
            ctx.sensitive,
            ctx.algorithm.name(),
            cell_param,
            split.seed,
        );
        // Resume: reuse completed cells, keep recorded failures.
        if let Some(row) = persist::read_cell_record(dirs, &id)? {
            let mut out = outcome.lock().expect("lock");
            out.reused += 1;
            results.lock().expect("lock")[item_index] = Some(CellResult::Done(row));
            return Ok(());
        }
        if dirs.cell_failed(&id).exists() {
            let mut out = outcome.lock().expect("lock");
            out.failed += 1;
            results.lock().expect("lock")[item_index] =
                Some(CellResult::Failed { run_id: id, split_id, param: cell_param });
            return Ok(());
        }
        match execute_cell(ctx, dirs, split, cell_param) {
            Ok(record) => {
                let mut out = outcome.lock().expect("lock");
                out.executed += 1;
                results.lock().expect("lock")[item_index] = Some(CellResult::Done(record.to_row()));
            }
            Err(Error::Train(msg)) => {
                // a failed cell never aborts its siblings
                persist::write_atomic(&dirs.cell_failed(&id), msg.as_bytes())?;
                let mut out = outcome.lock().expect("lock");
                out.failed += 1;
                results.lock().expect("lock")[item_index] =
                    Some(CellResult::Failed { run_id: id, split_id, param: cell_param });
            }
            Err(other) => return Err(other),
        }
        Ok(())
    };

    let worker_error: Mutex<Option<Error>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..ctx.config.workers.max(1) {
            scope.spawn(|| loop {
                let item = next.fetch_add(1, Ordering::SeqCst);
                if item >= work.len() {
                    break;
                }
                if let Err(e) = run_item(item) {
                    *worker_error.lock().expect("lock") = Some(e);
                    break;
                }
            });
        }
    });
    if let Some(e) = worker_error.into_inner().expect("lock") {
        return Err(e);
    }

    // Assemble the combination results in enumeration order.
    let rows: Vec<RecordRow> = results
        .into_inner()
        .expect("lock")
        .into_iter()
        .map(|r| match r.expect("every work item resolved") {
            CellResult::Done(row) => row,
            CellResult::Failed { run_id, split_id, param } => RecordRow {
                run_id,
                split_id,
                param,
                metrics: MetricVector::from_values(vec![
                    None;
                    fairbench_core::metrics::registry()
                        .len()
                ])
                .expect("registry-sized"),
            },
        })
        .collect();
    let path = dirs.results_csv(
        &ctx.staged.dataset,
        ctx.staged.variant(),
        ctx.sensitive,
        ctx.algorithm.name(),
    );
    persist::write_atomic(&path, persist::render_results(&rows).as_bytes())?;
    Ok(outcome.into_inner().expect("lock"))
}

/// Nested tuning for one split: fit every grid parameter on a 2/3 subsplit
/// of the training rows, score on the held-out third, pick the winner.
fn tuned_param(ctx: &CellContext, _dirs: &OutDirs, split: &SplitPlan) -> Result<Option<Option<f64>>> {
    let grid = ctx.config.grid_for(&ctx.algorithm);
    if grid.len() == 1 {
        return Ok(Some(grid[0]));
    }
    let train = &split.train_indices;
    let seed = selection_seed(ctx, split);
    let plan = make_splits(train.len(), 1, TRAIN_FRACTION, seed)?.remove(0);
    let sub_train: Vec<usize> = plan.train_indices.iter().map(|&i| train[i]).collect();
    let validation: Vec<usize> = plan.test_indices.iter().map(|&i| train[i]).collect();

    let mut candidates = Vec::new();
    for param in &grid {
        match ctx.fit_and_predict(&sub_train, &validation, *param) {
            Ok((predictions, _)) => {
                let metrics = ctx.evaluate(&validation, &predictions)?;
                candidates.push(RunRecord {
                    run_id: String::new(),
                    dataset: ctx.staged.dataset.clone(),
                    variant: ctx.staged.variant(),
                    sensitive: ctx.sensitive.to_string(),
                    algorithm: ctx.algorithm.name().to_string(),
                    split_id: split.split_id,
                    param: *param,
                    metrics,
                    wall_time: 0.0,
                });
            }
            Err(Error::Train(_)) => continue,
            Err(other) => return Err(other),
        }
    }
    if candidates.is_empty() {
        return Ok(None);
    }
    Ok(Some(select_param(&candidates, ctx.config.objective)?))
}
