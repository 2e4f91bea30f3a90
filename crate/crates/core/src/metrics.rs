//! Accuracy and group-fairness measures over (y_true, y_pred, s) triples.
//!
//! Every measure lives in one canonical registry so result files share a
//! fixed column contract. Measures that would divide by zero evaluate to
//! `None` ("undefined"), which serializes as an empty cell; undefinedness
//! propagates through aggregations instead of being silently replaced.

use crate::error::{Error, Result};

/// Predictions joined with ground truth and sensitive-group membership.
#[derive(Debug, Clone)]
pub struct PredictionSet {
    y_true: Vec<u8>,
    y_pred: Vec<u8>,
    /// Per-row group id; `group_names[id]` is the category string.
    groups: Vec<usize>,
    group_names: Vec<String>,
    privileged: usize,
}

impl PredictionSet {
    pub fn new<S: AsRef<str>>(
        y_true: Vec<u8>,
        y_pred: Vec<u8>,
        s: &[S],
        privileged: &str,
    ) -> Result<Self> {
        if y_true.is_empty() || y_true.len() != y_pred.len() || y_true.len() != s.len() {
            return Err(Error::Analysis(format!(
                "prediction set needs equal non-zero lengths, got {}/{}/{}",
                y_true.len(),
                y_pred.len(),
                s.len()
            )));
        }
        if y_true.iter().chain(y_pred.iter()).any(|v| *v > 1) {
            return Err(Error::Analysis("labels must be 0/1".into()));
        }
        let mut group_names: Vec<String> = Vec::new();
        let mut groups = Vec::with_capacity(s.len());
        for v in s {
            let v = v.as_ref();
            let id = match group_names.iter().position(|g| g == v) {
                Some(id) => id,
                None => {
                    group_names.push(v.to_string());
                    group_names.len() - 1
                }
            };
            groups.push(id);
        }
        let privileged_id = group_names
            .iter()
            .position(|g| g == privileged)
            .ok_or_else(|| {
                Error::Analysis(format!("privileged group '{privileged}' never occurs"))
            })?;
        Ok(Self { y_true, y_pred, groups, group_names, privileged: privileged_id })
    }

    pub fn len(&self) -> usize {
        self.y_true.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_true.is_empty()
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn privileged_name(&self) -> &str {
        &self.group_names[self.privileged]
    }

    pub fn rows(&self) -> impl Iterator<Item = (u8, u8, usize)> + '_ {
        self.y_true
            .iter()
            .zip(&self.y_pred)
            .zip(&self.groups)
            .map(|((t, p), g)| (*t, *p, *g))
    }
}

/// Exact confusion counts for one group (or a pool of groups).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn n(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn predicted_positive(&self) -> usize {
        self.tp + self.fp
    }

    pub fn actual_positive(&self) -> usize {
        self.tp + self.fn_
    }

    fn add(&mut self, other: &Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }

    pub fn positive_rate(&self) -> Option<f64> {
        ratio(self.predicted_positive(), self.n())
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.n())
    }

    pub fn tpr(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn tnr(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn bcr(&self) -> Option<f64> {
        Some((self.tpr()? + self.tnr()?) / 2.0)
    }

    /// P[Y = 1 | predicted positive].
    pub fn calibration_pos(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    /// P[Y = 1 | predicted negative].
    pub fn calibration_neg(&self) -> Option<f64> {
        ratio(self.fn_, self.fn_ + self.tn)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Per-group confusion counts in group first-appearance order.
#[derive(Debug, Clone)]
pub struct GroupStats {
    pub group_names: Vec<String>,
    pub privileged: usize,
    pub per_group: Vec<Counts>,
}

/// Tally exact confusion counts per sensitive group.
pub fn confusion_by_group(p: &PredictionSet) -> GroupStats {
    let mut per_group = vec![Counts::default(); p.group_names.len()];
    for (t, pred, g) in p.rows() {
        let c = &mut per_group[g];
        match (t, pred) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fn_ += 1,
            _ => unreachable!("labels validated"),
        }
    }
    GroupStats {
        group_names: p.group_names.clone(),
        privileged: p.privileged,
        per_group,
    }
}

impl GroupStats {
    pub fn overall(&self) -> Counts {
        let mut total = Counts::default();
        for c in &self.per_group {
            total.add(c);
        }
        total
    }

    pub fn privileged_counts(&self) -> &Counts {
        &self.per_group[self.privileged]
    }

    /// Indices of the unprivileged groups in first-appearance order.
    pub fn unprivileged(&self) -> Vec<usize> {
        (0..self.per_group.len()).filter(|&g| g != self.privileged).collect()
    }

    /// All unprivileged rows pooled into one count block.
    pub fn pooled_unprivileged(&self) -> Counts {
        let mut pooled = Counts::default();
        for g in self.unprivileged() {
            pooled.add(&self.per_group[g]);
        }
        pooled
    }
}

/// Overall accuracy-family measures: (accuracy, tpr, tnr, bcr).
pub fn accuracy_measures(c: &Counts) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    (c.accuracy(), c.tpr(), c.tnr(), c.bcr())
}

/// Grouping strategy for measures compared across sensitive values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Pool every unprivileged group into one.
    Binary,
    /// Keep each sensitive value separate and average the comparisons.
    PerValue,
}

/// How per-group values are aggregated into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Mean,
    /// Mean over unprivileged groups of f(g) / f(privileged).
    Ratio,
    /// Mean over unprivileged groups of 1 - (f(privileged) - f(g)).
    Diff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseMeasure {
    Accuracy,
    Tpr,
    Tnr,
    Bcr,
}

impl BaseMeasure {
    pub fn of(&self, c: &Counts) -> Option<f64> {
        match self {
            BaseMeasure::Accuracy => c.accuracy(),
            BaseMeasure::Tpr => c.tpr(),
            BaseMeasure::Tnr => c.tnr(),
            BaseMeasure::Bcr => c.bcr(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BaseMeasure::Accuracy => "acc",
            BaseMeasure::Tpr => "tpr",
            BaseMeasure::Tnr => "tnr",
            BaseMeasure::Bcr => "bcr",
        }
    }
}

/// Positive-rate ratio of unprivileged to privileged; 1 is perfectly fair.
pub fn disparate_impact(p: &PredictionSet, grouping: Grouping) -> Option<f64> {
    let stats = confusion_by_group(p);
    di_from_stats(&stats, grouping)
}

fn di_from_stats(stats: &GroupStats, grouping: Grouping) -> Option<f64> {
    let priv_rate = stats.privileged_counts().positive_rate()?;
    if priv_rate == 0.0 {
        return None;
    }
    match grouping {
        Grouping::Binary => {
            let unpriv_rate = stats.pooled_unprivileged().positive_rate()?;
            Some(unpriv_rate / priv_rate)
        }
        Grouping::PerValue => {
            let unpriv = stats.unprivileged();
            if unpriv.is_empty() {
                return None;
            }
            let mut sum = 0.0;
            for g in &unpriv {
                sum += stats.per_group[*g].positive_rate()? / priv_rate;
            }
            Some(sum / unpriv.len() as f64)
        }
    }
}

/// 1 minus the positive-rate difference (privileged minus unprivileged).
/// Ranges over [0, 2]; values above 1 mean skew favoring the unprivileged
/// side, and the difference is deliberately not an absolute value.
pub fn cv_score(p: &PredictionSet, grouping: Grouping) -> Option<f64> {
    let stats = confusion_by_group(p);
    cv_from_stats(&stats, grouping)
}

fn cv_from_stats(stats: &GroupStats, grouping: Grouping) -> Option<f64> {
    let priv_rate = stats.privileged_counts().positive_rate()?;
    match grouping {
        Grouping::Binary => {
            let unpriv_rate = stats.pooled_unprivileged().positive_rate()?;
            Some(1.0 - (priv_rate - unpriv_rate))
        }
        Grouping::PerValue => {
            let unpriv = stats.unprivileged();
            if unpriv.is_empty() {
                return None;
            }
            let mut sum = 0.0;
            for g in &unpriv {
                sum += 1.0 - (priv_rate - stats.per_group[*g].positive_rate()?);
            }
            Some(sum / unpriv.len() as f64)
        }
    }
}

/// A group-conditioned accuracy-family measure, aggregated across groups.
pub fn group_conditioned(
    p: &PredictionSet,
    base: BaseMeasure,
    aggregation: Aggregation,
    grouping: Grouping,
) -> Option<f64> {
    let stats = confusion_by_group(p);
    group_conditioned_from_stats(&stats, base, aggregation, grouping)
}

fn group_conditioned_from_stats(
    stats: &GroupStats,
    base: BaseMeasure,
    aggregation: Aggregation,
    grouping: Grouping,
) -> Option<f64> {
    // The comparison blocks: privileged plus either the pooled unprivileged
    // rows or each unprivileged group separately.
    let unpriv_blocks: Vec<Counts> = match grouping {
        Grouping::Binary => {
            let pooled = stats.pooled_unprivileged();
            if pooled.n() == 0 {
                return None;
            }
            vec![pooled]
        }
        Grouping::PerValue => {
            let unpriv = stats.unprivileged();
            if unpriv.is_empty() && aggregation != Aggregation::Mean {
                return None;
            }
            unpriv.iter().map(|&g| stats.per_group[g]).collect()
        }
    };
    let f_priv = base.of(stats.privileged_counts());
    match aggregation {
        Aggregation::Mean => {
            // Unweighted mean over all comparison blocks including privileged.
            let mut sum = f_priv?;
            for block in &unpriv_blocks {
                sum += base.of(block)?;
            }
            Some(sum / (unpriv_blocks.len() + 1) as f64)
        }
        Aggregation::Ratio => {
            let f_priv = f_priv?;
            if f_priv == 0.0 {
                return None;
            }
            let mut sum = 0.0;
            for block in &unpriv_blocks {
                sum += base.of(block)? / f_priv;
            }
            Some(sum / unpriv_blocks.len() as f64)
        }
        Aggregation::Diff => {
            let f_priv = f_priv?;
            let mut sum = 0.0;
            for block in &unpriv_blocks {
                sum += 1.0 - (f_priv - base.of(block)?);
            }
            Some(sum / unpriv_blocks.len() as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationBranch {
    /// P[Y = 1 | predicted positive, group].
    Pos,
    /// P[Y = 1 | predicted negative, group].
    Neg,
}

impl CalibrationBranch {
    fn of(&self, c: &Counts) -> Option<f64> {
        match self {
            CalibrationBranch::Pos => c.calibration_pos(),
            CalibrationBranch::Neg => c.calibration_neg(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CalibrationBranch::Pos => "pos",
            CalibrationBranch::Neg => "neg",
        }
    }
}

/// Group-conditioned calibration, aggregated across sensitive values.
pub fn calibration(
    p: &PredictionSet,
    branch: CalibrationBranch,
    aggregation: Aggregation,
) -> Option<f64> {
    let stats = confusion_by_group(p);
    calibration_from_stats(&stats, branch, aggregation)
}

fn calibration_from_stats(
    stats: &GroupStats,
    branch: CalibrationBranch,
    aggregation: Aggregation,
) -> Option<f64> {
    match aggregation {
        Aggregation::Mean => {
            let mut sum = 0.0;
            for c in &stats.per_group {
                sum += branch.of(c)?;
            }
            Some(sum / stats.per_group.len() as f64)
        }
        Aggregation::Ratio => {
            let f_priv = branch.of(stats.privileged_counts())?;
            if f_priv == 0.0 {
                return None;
            }
            let unpriv = stats.unprivileged();
            if unpriv.is_empty() {
                return None;
            }
            let mut sum = 0.0;
            for g in &unpriv {
                sum += branch.of(&stats.per_group[*g])? / f_priv;
            }
            Some(sum / unpriv.len() as f64)
        }
        Aggregation::Diff => {
            let f_priv = branch.of(stats.privileged_counts())?;
            let unpriv = stats.unprivileged();
            if unpriv.is_empty() {
                return None;
            }
            let mut sum = 0.0;
            for g in &unpriv {
                sum += 1.0 - (f_priv - branch.of(&stats.per_group[*g])?);
            }
            Some(sum / unpriv.len() as f64)
        }
    }
}

const BASES: [BaseMeasure; 4] =
    [BaseMeasure::Accuracy, BaseMeasure::Tpr, BaseMeasure::Tnr, BaseMeasure::Bcr];
const AGGREGATIONS: [Aggregation; 3] = [Aggregation::Mean, Aggregation::Ratio, Aggregation::Diff];
const GROUPINGS: [Grouping; 2] = [Grouping::Binary, Grouping::PerValue];

fn aggregation_str(a: Aggregation) -> &'static str {
    match a {
        Aggregation::Mean => "mean",
        Aggregation::Ratio => "ratio",
        Aggregation::Diff => "diff",
    }
}

fn grouping_str(g: Grouping) -> &'static str {
    match g {
        Grouping::Binary => "bin",
        Grouping::PerValue => "avg",
    }
}

/// Canonical metric names, in the fixed column order used by every output.
pub fn registry() -> Vec<String> {
    let mut names = vec![
        "acc".to_string(),
        "tpr".to_string(),
        "tnr".to_string(),
        "bcr".to_string(),
        "di_bin".to_string(),
        "di_avg".to_string(),
        "cv_bin".to_string(),
        "cv_avg".to_string(),
    ];
    for base in BASES {
        for agg in AGGREGATIONS {
            for grouping in GROUPINGS {
                names.push(format!(
                    "{}_{}_{}",
                    base.as_str(),
                    aggregation_str(agg),
                    grouping_str(grouping)
                ));
            }
        }
    }
    for branch in [CalibrationBranch::Pos, CalibrationBranch::Neg] {
        for agg in AGGREGATIONS {
            names.push(format!("calib_{}_{}", branch.as_str(), aggregation_str(agg)));
        }
    }
    names
}

/// Every registry measure evaluated once, in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricVector {
    values: Vec<Option<f64>>,
}

impl MetricVector {
    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn from_values(values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != registry().len() {
            return Err(Error::Analysis(format!(
                "metric vector needs {} entries, got {}",
                registry().len(),
                values.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let idx = registry().iter().position(|n| n == name)?;
        self.values[idx]
    }
}

/// Evaluate the full measure suite on a prediction set.
pub fn full_metric_vector(p: &PredictionSet) -> MetricVector {
    let stats = confusion_by_group(p);
    let overall = stats.overall();
    let mut values = Vec::with_capacity(registry().len());
    values.push(overall.accuracy());
    values.push(overall.tpr());
    values.push(overall.tnr());
    values.push(overall.bcr());
    values.push(di_from_stats(&stats, Grouping::Binary));
    values.push(di_from_stats(&stats, Grouping::PerValue));
    values.push(cv_from_stats(&stats, Grouping::Binary));
    values.push(cv_from_stats(&stats, Grouping::PerValue));
    for base in BASES {
        for agg in AGGREGATIONS {
            for grouping in GROUPINGS {
                values.push(group_conditioned_from_stats(&stats, base, agg, grouping));
            }
        }
    }
    for branch in [CalibrationBranch::Pos, CalibrationBranch::Neg] {
        for agg in AGGREGATIONS {
            values.push(calibration_from_stats(&stats, branch, agg));
        }
    }
    MetricVector { values }
}
