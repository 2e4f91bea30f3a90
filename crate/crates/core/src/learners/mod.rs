//! From-scratch baseline classifiers with a uniform fit/predict contract
//! over numeric matrices.

pub mod gnb;
pub mod logreg;
pub mod optim;
pub mod svm;
pub mod tree;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
pub use gnb::GnbModel;
pub use logreg::{sigmoid, LinearModel};
pub use tree::{TreeModel, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Gnb,
    Logreg,
    Tree,
    LinearSvm,
}

impl LearnerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LearnerKind::Gnb => "gnb",
            LearnerKind::Logreg => "logreg",
            LearnerKind::Tree => "tree",
            LearnerKind::LinearSvm => "svm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gnb" => Ok(LearnerKind::Gnb),
            "logreg" => Ok(LearnerKind::Logreg),
            "tree" => Ok(LearnerKind::Tree),
            "svm" => Ok(LearnerKind::LinearSvm),
            other => Err(Error::Train(format!("unknown learner '{other}'"))),
        }
    }

    pub fn all() -> [LearnerKind; 4] {
        [LearnerKind::Gnb, LearnerKind::Logreg, LearnerKind::Tree, LearnerKind::LinearSvm]
    }
}

/// Key/value hyperparameter settings with typed accessors.
#[derive(Debug, Clone, Default)]
pub struct Hyper {
    values: BTreeMap<String, f64>,
}

impl Hyper {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.values.get(key).copied().unwrap_or(default)
    }

    pub fn flag_or(&self, key: &str, default: bool) -> bool {
        self.values.get(key).map(|v| *v != 0.0).unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Gnb(GnbModel),
    Logreg(LinearModel),
    Tree(TreeModel),
    LinearSvm(LinearModel),
}

/// A fitted baseline classifier. Immutable after fit; prediction rejects
/// matrices whose column count differs from the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: LearnerKind,
    pub feature_count: usize,
    pub params: ModelParams,
}

/// Train one of the baseline learners.
///
/// Recognized hyper keys: `l2`, `tol`, `max_iter`, `standardize` (logreg);
/// `max_depth`, `min_leaf` (tree); `l2`, `epochs`, `standardize` (svm).
pub fn fit(kind: LearnerKind, x: &FeatureMatrix, y: &[u8], hyper: &Hyper) -> Result<TrainedModel> {
    if x.n_rows() == 0 {
        return Err(Error::Train("cannot fit on an empty matrix".into()));
    }
    let params = match kind {
        LearnerKind::Gnb => ModelParams::Gnb(GnbModel::fit(x, y)?),
        LearnerKind::Logreg => ModelParams::Logreg(logreg::fit(
            x,
            y,
            hyper.get_or("l2", logreg::DEFAULT_L2),
            hyper.get_or("tol", logreg::DEFAULT_TOL),
            hyper.get_or("max_iter", logreg::DEFAULT_MAX_ITER as f64) as usize,
            hyper.flag_or("standardize", true),
        )?),
        LearnerKind::Tree => ModelParams::Tree(TreeModel::fit(
            x,
            y,
            hyper.get_or("max_depth", tree::DEFAULT_MAX_DEPTH as f64) as usize,
            hyper.get_or("min_leaf", tree::DEFAULT_MIN_LEAF as f64) as usize,
        )?),
        LearnerKind::LinearSvm => ModelParams::LinearSvm(svm::fit(
            x,
            y,
            hyper.get_or("l2", svm::DEFAULT_L2),
            hyper.get_or("epochs", svm::DEFAULT_EPOCHS as f64) as usize,
            hyper.flag_or("standardize", true),
        )?),
    };
    Ok(TrainedModel { kind, feature_count: x.n_cols(), params })
}

impl TrainedModel {
    fn check_shape(&self, x: &FeatureMatrix) -> Result<()> {
        if x.n_cols() != self.feature_count {
            return Err(Error::Predict(format!(
                "expected {} features, got {}",
                self.feature_count,
                x.n_cols()
            )));
        }
        Ok(())
    }

    /// Hard 0/1 predictions; probability ties at 0.5 go to the positive class.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        self.check_shape(x)?;
        match &self.params {
            ModelParams::Gnb(m) => Ok(m.predict_proba(x)?.iter().map(|p| (*p >= 0.5) as u8).collect()),
            ModelParams::Logreg(m) => Ok(m.scores(x)?.iter().map(|z| (sigmoid(*z) >= 0.5) as u8).collect()),
            ModelParams::Tree(m) => m.predict(x),
            ModelParams::LinearSvm(m) => Ok(m.scores(x)?.iter().map(|z| (*z >= 0.0) as u8).collect()),
        }
    }

    /// P(y = 1 | x) per row; only probabilistic learners support this.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_shape(x)?;
        match &self.params {
            ModelParams::Gnb(m) => m.predict_proba(x),
            ModelParams::Logreg(m) => Ok(m.scores(x)?.iter().map(|z| sigmoid(*z)).collect()),
            ModelParams::Tree(_) | ModelParams::LinearSvm(_) => Err(Error::Predict(format!(
                "{} does not expose probabilities",
                self.kind.as_str()
            ))),
        }
    }

    /// Serialize to the versioned flat text model format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("fairbench-model v1\n");
        out.push_str(&format!("kind {}\n", self.kind.as_str()));
        out.push_str(&format!("features {}\n", self.feature_count));
        match &self.params {
            ModelParams::Gnb(m) => {
                out.push_str(&format!("priors {}\n", render_vec(&m.priors)));
                out.push_str(&format!("means0 {}\n", render_vec(&m.means[0])));
                out.push_str(&format!("means1 {}\n", render_vec(&m.means[1])));
                out.push_str(&format!("vars0 {}\n", render_vec(&m.variances[0])));
                out.push_str(&format!("vars1 {}\n", render_vec(&m.variances[1])));
            }
            ModelParams::Logreg(m) | ModelParams::LinearSvm(m) => {
                out.push_str(&format!("means {}\n", render_vec(&m.means)));
                out.push_str(&format!("stds {}\n", render_vec(&m.stds)));
                out.push_str(&format!("weights {}\n", render_vec(&m.weights)));
            }
            ModelParams::Tree(m) => {
                out.push_str(&format!("nodes {}\n", m.nodes.len()));
                for node in &m.nodes {
                    match node {
                        TreeNode::Leaf { prediction } => out.push_str(&format!("leaf {prediction}\n")),
                        TreeNode::Split { feature, threshold, left, right } => {
                            out.push_str(&format!("split {feature} {threshold} {left} {right}\n"))
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<TrainedModel> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != "fairbench-model v1" {
            return Err(Error::Format(format!("unsupported model header '{header}'")));
        }
        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        let mut node_lines: Vec<String> = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            if line.starts_with("leaf") || line.starts_with("split") {
                node_lines.push(line.to_string());
                continue;
            }
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| Error::Format(format!("bad model line '{line}'")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            fields
                .get(k)
                .ok_or_else(|| Error::Format(format!("model field '{k}' missing")))
        };
        let kind = LearnerKind::parse(get("kind")?)?;
        let feature_count: usize = get("features")?
            .parse()
            .map_err(|_| Error::Format("bad feature count".into()))?;
        let params = match kind {
            LearnerKind::Gnb => {
                let priors = parse_vec(get("priors")?)?;
                if priors.len() != 2 {
                    return Err(Error::Format("gnb priors must have two entries".into()));
                }
                ModelParams::Gnb(GnbModel {
                    priors: [priors[0], priors[1]],
                    means: [parse_vec(get("means0")?)?, parse_vec(get("means1")?)?],
                    variances: [parse_vec(get("vars0")?)?, parse_vec(get("vars1")?)?],
                })
            }
            LearnerKind::Logreg | LearnerKind::LinearSvm => {
                let m = LinearModel {
                    weights: parse_vec(get("weights")?)?,
                    means: parse_vec(get("means")?)?,
                    stds: parse_vec(get("stds")?)?,
                };
                if kind == LearnerKind::Logreg {
                    ModelParams::Logreg(m)
                } else {
                    ModelParams::LinearSvm(m)
                }
            }
            LearnerKind::Tree => {
                let mut nodes = Vec::with_capacity(node_lines.len());
                for line in &node_lines {
                    let toks: Vec<&str> = line.split_whitespace().collect();
                    let node = match toks.as_slice() {
                        ["leaf", p] => TreeNode::Leaf {
                            prediction: p.parse().map_err(|_| Error::Format("bad leaf".into()))?,
                        },
                        ["split", f, t, l, r] => TreeNode::Split {
                            feature: f.parse().map_err(|_| Error::Format("bad split".into()))?,
                            threshold: t.parse().map_err(|_| Error::Format("bad split".into()))?,
                            left: l.parse().map_err(|_| Error::Format("bad split".into()))?,
                            right: r.parse().map_err(|_| Error::Format("bad split".into()))?,
                        },
                        _ => return Err(Error::Format(format!("bad tree node '{line}'"))),
                    };
                    nodes.push(node);
                }
                ModelParams::Tree(TreeModel { nodes, feature_count })
            }
        };
        Ok(TrainedModel { kind, feature_count, params })
    }
}

pub(crate) fn render_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

pub(crate) fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{t}'"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_data(n: usize, seed: u64) -> (FeatureMatrix, Vec<u8>) {
        let mut rng = SplitMix64::new(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.normal(), rng.normal()]).collect();
        let y: Vec<u8> = rows.iter().map(|r| (r[0] + 0.3 * r[1] > 0.0) as u8).collect();
        (FeatureMatrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn predictions_are_deterministic_and_repeatable() {
        let (x, y) = random_data(80, 4);
        for kind in LearnerKind::all() {
            let model = fit(kind, &x, &y, &Hyper::new()).unwrap();
            let a = model.predict(&x).unwrap();
            let b = model.predict(&x).unwrap();
            assert_eq!(a, b, "{}", kind.as_str());
        }
    }

    #[test]
    fn empty_matrix_predicts_empty() {
        let (x, y) = random_data(40, 5);
        let model = fit(LearnerKind::Logreg, &x, &y, &Hyper::new()).unwrap();
        let empty = FeatureMatrix::new(0, 2, Vec::new()).unwrap();
        assert!(model.predict(&empty).unwrap().is_empty());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let (x, y) = random_data(40, 6);
        let model = fit(LearnerKind::Gnb, &x, &y, &Hyper::new()).unwrap();
        let wrong = FeatureMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(model.predict(&wrong).is_err());
        assert!(model.predict_proba(&wrong).is_err());
    }

    #[test]
    fn proba_unsupported_for_margin_learners() {
        let (x, y) = random_data(40, 7);
        for kind in [LearnerKind::Tree, LearnerKind::LinearSvm] {
            let model = fit(kind, &x, &y, &Hyper::new()).unwrap();
            assert!(model.predict_proba(&x).is_err());
        }
    }

    #[test]
    fn predict_thresholds_proba_consistently() {
        // sign agreement between predict and predict_proba on 1,000 random rows
        let (x, y) = random_data(200, 8);
        let mut rng = SplitMix64::new(99);
        let probe_rows: Vec<Vec<f64>> =
            (0..1000).map(|_| vec![rng.normal() * 2.0, rng.normal() * 2.0]).collect();
        let probe = FeatureMatrix::from_rows(&probe_rows).unwrap();
        for kind in [LearnerKind::Gnb, LearnerKind::Logreg] {
            let model = fit(kind, &x, &y, &Hyper::new()).unwrap();
            let labels = model.predict(&probe).unwrap();
            let probas = model.predict_proba(&probe).unwrap();
            for (label, p) in labels.iter().zip(&probas) {
                assert!((0.0..=1.0).contains(p));
                assert_eq!(*label, (*p >= 0.5) as u8);
            }
        }
    }

    #[test]
    fn zero_weight_logreg_gives_half_probability() {
        let model = TrainedModel {
            kind: LearnerKind::Logreg,
            feature_count: 2,
            params: ModelParams::Logreg(LinearModel {
                weights: vec![0.0, 0.0, 0.0],
                means: vec![0.0, 0.0],
                stds: vec![1.0, 1.0],
            }),
        };
        let x = FeatureMatrix::from_rows(&[vec![3.0, -4.0], vec![0.0, 0.0]]).unwrap();
        for p in model.predict_proba(&x).unwrap() {
            assert_eq!(p, 0.5);
        }
        // the 0.5 tie routes to the positive class
        assert_eq!(model.predict(&x).unwrap(), vec![1, 1]);
    }

    #[test]
    fn text_round_trip_all_kinds() {
        let (x, y) = random_data(60, 10);
        for kind in LearnerKind::all() {
            let model = fit(kind, &x, &y, &Hyper::new()).unwrap();
            let text = model.to_text();
            let back = TrainedModel::from_text(&text).unwrap();
            assert_eq!(model, back, "{}", kind.as_str());
            assert_eq!(model.predict(&x).unwrap(), back.predict(&x).unwrap());
        }
    }
}
