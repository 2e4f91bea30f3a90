//! Fairness-enhancing methods, each exposing one tradeoff parameter:
//! feature repair (`di_remover`), per-group naive Bayes with prior
//! calibration (`two_nb`), fairness-regularized logistic regression
//! (`prejudice_remover`), and covariance-constrained logistic regression
//! (`zafar`).

pub mod prejudice;
pub mod repair;
pub mod two_nb;
pub mod zafar;

use crate::error::{Error, Result};
use crate::learners::{parse_vec, render_vec, LearnerKind, LinearModel, TrainedModel};
use crate::matrix::FeatureMatrix;
pub use prejudice::{fit_prejudice_remover, PrejudiceRemoverModel};
pub use repair::{repair_disparate_impact, RepairedTable};
pub use two_nb::{fit_two_naive_bayes, TwoNaiveBayesModel};
pub use zafar::{fit_zafar, slab_projection, ZafarModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterventionKind {
    DiRemover,
    TwoNb,
    PrejudiceRemover,
    Zafar,
}

impl InterventionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InterventionKind::DiRemover => "di_remover",
            InterventionKind::TwoNb => "two_nb",
            InterventionKind::PrejudiceRemover => "prejudice_remover",
            InterventionKind::Zafar => "zafar",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "di_remover" => Ok(InterventionKind::DiRemover),
            "two_nb" => Ok(InterventionKind::TwoNb),
            "prejudice_remover" => Ok(InterventionKind::PrejudiceRemover),
            "zafar" => Ok(InterventionKind::Zafar),
            other => Err(Error::Train(format!("unknown intervention '{other}'"))),
        }
    }

    pub fn all() -> [InterventionKind; 4] {
        [
            InterventionKind::DiRemover,
            InterventionKind::TwoNb,
            InterventionKind::PrejudiceRemover,
            InterventionKind::Zafar,
        ]
    }

    /// The standard tuning grid for this method's tradeoff parameter.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            // repair amount: increments of 0.05 in [0, 1]
            InterventionKind::DiRemover => (0..=20).map(|i| i as f64 / 20.0).collect(),
            // prior smoothing: increments of 0.1 in [0, 1]
            InterventionKind::TwoNb => (0..=10).map(|i| i as f64 / 10.0).collect(),
            // fairness weight: 0..300, finer at the low end
            InterventionKind::PrejudiceRemover => vec![
                0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 50.0, 100.0, 150.0, 200.0,
                250.0, 300.0,
            ],
            // covariance multiplier: 10 logarithmic steps across [0.001, 1]
            InterventionKind::Zafar => {
                (0..10).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 9.0)).collect()
            }
        }
    }

    /// Parameter used when a single untuned run is wanted.
    pub fn default_param(&self) -> f64 {
        match self {
            InterventionKind::DiRemover => 1.0,
            InterventionKind::TwoNb => 0.1,
            InterventionKind::PrejudiceRemover => 1.0,
            InterventionKind::Zafar => 1.0,
        }
    }

    /// The parameter value that pushes hardest toward fairness.
    pub fn max_fairness_param(&self) -> f64 {
        match self {
            InterventionKind::DiRemover => 1.0,
            InterventionKind::TwoNb => 0.1,
            InterventionKind::PrejudiceRemover => 300.0,
            InterventionKind::Zafar => 0.001,
        }
    }

    pub fn requires_binary_sensitive(&self) -> bool {
        matches!(
            self,
            InterventionKind::TwoNb | InterventionKind::PrejudiceRemover | InterventionKind::Zafar
        )
    }
}

/// A fairness method plus the parameter values that configure one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionSpec {
    pub kind: InterventionKind,
    pub param: f64,
    /// Learner trained on repaired data (di_remover only).
    pub base_learner: Option<LearnerKind>,
    /// L2 strength for the logistic-based methods.
    pub l2: f64,
}

impl InterventionSpec {
    pub fn new(kind: InterventionKind, param: f64) -> Self {
        Self {
            kind,
            param,
            base_learner: if kind == InterventionKind::DiRemover {
                Some(LearnerKind::Logreg)
            } else {
                None
            },
            l2: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            InterventionKind::DiRemover | InterventionKind::TwoNb => {
                (0.0..=1.0).contains(&self.param)
            }
            InterventionKind::PrejudiceRemover => self.param >= 0.0,
            InterventionKind::Zafar => self.param > 0.0,
        };
        if !ok {
            return Err(Error::Train(format!(
                "parameter {} out of range for {}",
                self.param,
                self.kind.as_str()
            )));
        }
        if self.l2 < 0.0 {
            return Err(Error::Train("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// Any model the benchmark can produce, with a single prediction surface.
/// Grouped models need the sensitive codes at prediction time.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Baseline(TrainedModel),
    Repaired {
        base: TrainedModel,
        spec: InterventionSpec,
        repaired_columns: Vec<String>,
    },
    TwoNb { model: TwoNaiveBayesModel, spec: InterventionSpec },
    Prejudice { model: PrejudiceRemoverModel, spec: InterventionSpec },
    Zafar { model: ZafarModel, spec: InterventionSpec },
}

impl FittedModel {
    pub fn predict(&self, x: &FeatureMatrix, s: Option<&[u8]>) -> Result<Vec<u8>> {
        match self {
            FittedModel::Baseline(m) => m.predict(x),
            FittedModel::Repaired { base, .. } => base.predict(x),
            FittedModel::Zafar { model, .. } => model.predict(x),
            FittedModel::TwoNb { model, .. } => {
                let s = s.ok_or_else(|| {
                    Error::Predict("two_nb needs sensitive codes at prediction time".into())
                })?;
                model.predict(x, s)
            }
            FittedModel::Prejudice { model, .. } => {
                let s = s.ok_or_else(|| {
                    Error::Predict("prejudice_remover needs sensitive codes at prediction time".into())
                })?;
                model.predict(x, s)
            }
        }
    }

    /// Serialize with any intervention parameters embedded, in the same flat
    /// text family as baseline models.
    pub fn to_text(&self) -> String {
        match self {
            FittedModel::Baseline(m) => m.to_text(),
            FittedModel::Repaired { base, spec, repaired_columns } => {
                let mut out = String::from("fairbench-model v1\n");
                out.push_str("kind di_remover\n");
                out.push_str(&format!("param {}\n", spec.param));
                out.push_str(&format!("l2 {}\n", spec.l2));
                out.push_str(&format!(
                    "base_learner {}\n",
                    spec.base_learner.unwrap_or(LearnerKind::Logreg).as_str()
                ));
                for col in repaired_columns {
                    out.push_str(&format!("rcol {col}\n"));
                }
                out.push_str("base\n");
                out.push_str(&base.to_text());
                out
            }
            FittedModel::TwoNb { model, spec } => {
                let mut out = String::from("fairbench-model v1\n");
                out.push_str("kind two_nb\n");
                out.push_str(&format!("param {}\n", spec.param));
                out.push_str(&format!("rounds {}\n", model.calibration_rounds));
                out.push_str(&format!("features {}\n", model.group_models[0].feature_count()));
                for (g, gm) in model.group_models.iter().enumerate() {
                    out.push_str(&format!("g{g}_priors {}\n", render_vec(&gm.priors)));
                    out.push_str(&format!("g{g}_means0 {}\n", render_vec(&gm.means[0])));
                    out.push_str(&format!("g{g}_means1 {}\n", render_vec(&gm.means[1])));
                    out.push_str(&format!("g{g}_vars0 {}\n", render_vec(&gm.variances[0])));
                    out.push_str(&format!("g{g}_vars1 {}\n", render_vec(&gm.variances[1])));
                }
                out
            }
            FittedModel::Prejudice { model, spec } => {
                let mut out = String::from("fairbench-model v1\n");
                out.push_str("kind prejudice_remover\n");
                out.push_str(&format!("param {}\n", spec.param));
                out.push_str(&format!("l2 {}\n", spec.l2));
                out.push_str(&format!("means {}\n", render_vec(&model.means)));
                out.push_str(&format!("stds {}\n", render_vec(&model.stds)));
                out.push_str(&format!("weights0 {}\n", render_vec(&model.weights[0])));
                out.push_str(&format!("weights1 {}\n", render_vec(&model.weights[1])));
                out
            }
            FittedModel::Zafar { model, spec } => {
                let mut out = String::from("fairbench-model v1\n");
                out.push_str("kind zafar\n");
                out.push_str(&format!("param {}\n", spec.param));
                out.push_str(&format!("l2 {}\n", spec.l2));
                out.push_str(&format!("means {}\n", render_vec(&model.model.means)));
                out.push_str(&format!("stds {}\n", render_vec(&model.model.stds)));
                out.push_str(&format!("weights {}\n", render_vec(&model.model.weights)));
                out.push_str(&format!("v {}\n", render_vec(&model.covariance_direction)));
                out.push_str(&format!(
                    "bound {}\n",
                    if model.bound.is_finite() { format!("{}", model.bound) } else { "inf".into() }
                ));
                out.push_str(&format!("vacuous {}\n", model.constraint_vacuous as u8));
                out
            }
        }
    }

    pub fn from_text(text: &str) -> Result<FittedModel> {
        let kind_line = text
            .lines()
            .find(|l| l.starts_with("kind "))
            .ok_or_else(|| Error::Format("model kind missing".into()))?;
        let kind = &kind_line["kind ".len()..];
        if LearnerKind::parse(kind).is_ok() {
            return Ok(FittedModel::Baseline(TrainedModel::from_text(text)?));
        }
        let mut fields = std::collections::BTreeMap::new();
        let mut rcols = Vec::new();
        let mut base_text = None;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != "fairbench-model v1" {
            return Err(Error::Format(format!("unsupported model header '{header}'")));
        }
        let mut rest = Vec::new();
        for line in lines {
            if line == "base" {
                base_text = Some(rest.split_off(0));
                continue;
            }
            if base_text.is_some() {
                rest.push(line);
                continue;
            }
            if let Some(col) = line.strip_prefix("rcol ") {
                rcols.push(col.to_string());
            } else if let Some((k, v)) = line.split_once(' ') {
                fields.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| {
            fields
                .get(k)
                .ok_or_else(|| Error::Format(format!("model field '{k}' missing")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Format(format!("bad number in '{k}'")))
        };
        match kind {
            "di_remover" => {
                let base_lines = rest;
                if base_text.is_none() {
                    return Err(Error::Format("embedded base model missing".into()));
                }
                let base = TrainedModel::from_text(&base_lines.join("\n"))?;
                let mut spec = InterventionSpec::new(InterventionKind::DiRemover, num("param")?);
                spec.l2 = num("l2")?;
                spec.base_learner = Some(LearnerKind::parse(get("base_learner")?)?);
                Ok(FittedModel::Repaired { base, spec, repaired_columns: rcols })
            }
            "two_nb" => {
                let mut models = Vec::new();
                for g in 0..2 {
                    let priors = parse_vec(get(&format!("g{g}_priors"))?)?;
                    models.push(crate::learners::GnbModel {
                        priors: [priors[0], priors[1]],
                        means: [
                            parse_vec(get(&format!("g{g}_means0"))?)?,
                            parse_vec(get(&format!("g{g}_means1"))?)?,
                        ],
                        variances: [
                            parse_vec(get(&format!("g{g}_vars0"))?)?,
                            parse_vec(get(&format!("g{g}_vars1"))?)?,
                        ],
                    });
                }
                let param = num("param")?;
                Ok(FittedModel::TwoNb {
                    model: TwoNaiveBayesModel {
                        group_models: [models.remove(0), models.remove(0)],
                        prior_smoothing: param,
                        calibration_rounds: num("rounds")? as usize,
                    },
                    spec: InterventionSpec::new(InterventionKind::TwoNb, param),
                })
            }
            "prejudice_remover" => {
                let param = num("param")?;
                let mut spec = InterventionSpec::new(InterventionKind::PrejudiceRemover, param);
                spec.l2 = num("l2")?;
                Ok(FittedModel::Prejudice {
                    model: PrejudiceRemoverModel {
                        weights: [parse_vec(get("weights0")?)?, parse_vec(get("weights1")?)?],
                        means: parse_vec(get("means")?)?,
                        stds: parse_vec(get("stds")?)?,
                        fairness_weight: param,
                    },
                    spec,
                })
            }
            "zafar" => {
                let param = num("param")?;
                let mut spec = InterventionSpec::new(InterventionKind::Zafar, param);
                spec.l2 = num("l2")?;
                let bound_text = get("bound")?;
                let bound = if bound_text == "inf" {
                    f64::INFINITY
                } else {
                    bound_text.parse().map_err(|_| Error::Format("bad bound".into()))?
                };
                Ok(FittedModel::Zafar {
                    model: ZafarModel {
                        model: LinearModel {
                            weights: parse_vec(get("weights")?)?,
                            means: parse_vec(get("means")?)?,
                            stds: parse_vec(get("stds")?)?,
                        },
                        covariance_direction: parse_vec(get("v")?)?,
                        bound,
                        constraint_multiplier: param,
                        constraint_vacuous: get("vacuous")? == "1",
                    },
                    spec,
                })
            }
            other => Err(Error::Format(format!("unknown model kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{self, Hyper};
    use crate::rng::SplitMix64;

    #[test]
    fn grids_match_the_standard_protocol() {
        let lambda = InterventionKind::DiRemover.default_grid();
        assert_eq!(lambda.len(), 21);
        assert_eq!(lambda[0], 0.0);
        assert_eq!(lambda[1], 0.05);
        assert_eq!(lambda[20], 1.0);

        let beta = InterventionKind::TwoNb.default_grid();
        assert_eq!(beta.len(), 11);
        assert_eq!(beta[3], 0.3);

        let eta = InterventionKind::PrejudiceRemover.default_grid();
        assert_eq!(eta.len(), 15);
        assert_eq!(eta[0], 0.0);
        assert_eq!(*eta.last().unwrap(), 300.0);

        let c = InterventionKind::Zafar.default_grid();
        assert_eq!(c.len(), 10);
        assert!((c[0] - 0.001).abs() < 1e-15);
        assert!((c[9] - 1.0).abs() < 1e-12);
        for w in c.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn spec_validation_enforces_ranges() {
        assert!(InterventionSpec::new(InterventionKind::DiRemover, 1.2).validate().is_err());
        assert!(InterventionSpec::new(InterventionKind::TwoNb, -0.1).validate().is_err());
        assert!(InterventionSpec::new(InterventionKind::PrejudiceRemover, -1.0).validate().is_err());
        assert!(InterventionSpec::new(InterventionKind::Zafar, 0.0).validate().is_err());
        assert!(InterventionSpec::new(InterventionKind::Zafar, 0.001).validate().is_ok());
    }

    #[test]
    fn fitted_models_round_trip_through_text() {
        let mut rng = SplitMix64::new(15);
        let rows: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.normal(), rng.normal()]).collect();
        let x = crate::matrix::FeatureMatrix::from_rows(&rows).unwrap();
        let s: Vec<u8> = (0..60).map(|i| (i % 2) as u8).collect();
        let y: Vec<u8> = rows.iter().map(|r| (r[0] > 0.0) as u8).collect();

        let baseline = FittedModel::Baseline(
            learners::fit(learners::LearnerKind::Tree, &x, &y, &Hyper::new()).unwrap(),
        );
        let two_nb = FittedModel::TwoNb {
            model: fit_two_naive_bayes(&x, &s, &y, 0.3).unwrap(),
            spec: InterventionSpec::new(InterventionKind::TwoNb, 0.3),
        };
        let prejudice = FittedModel::Prejudice {
            model: fit_prejudice_remover(&x, &s, &y, 2.0, 1e-4).unwrap(),
            spec: InterventionSpec::new(InterventionKind::PrejudiceRemover, 2.0),
        };
        let zafar = FittedModel::Zafar {
            model: fit_zafar(&x, &s, &y, 0.5, 1e-4).unwrap(),
            spec: InterventionSpec::new(InterventionKind::Zafar, 0.5),
        };
        let repaired = FittedModel::Repaired {
            base: learners::fit(learners::LearnerKind::Logreg, &x, &y, &Hyper::new()).unwrap(),
            spec: InterventionSpec::new(InterventionKind::DiRemover, 0.5),
            repaired_columns: vec!["x1".into(), "charge=Battery on Officer".into()],
        };

        for model in [baseline, two_nb, prejudice, zafar, repaired] {
            let text = model.to_text();
            let back = FittedModel::from_text(&text).unwrap();
            assert_eq!(model, back);
            let a = model.predict(&x, Some(&s)).unwrap();
            let b = back.predict(&x, Some(&s)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn grouped_models_require_codes_at_prediction() {
        let mut rng = SplitMix64::new(16);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.normal()]).collect();
        let x = crate::matrix::FeatureMatrix::from_rows(&rows).unwrap();
        let s: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        let y: Vec<u8> = rows.iter().map(|r| (r[0] > 0.0) as u8).collect();
        let model = FittedModel::TwoNb {
            model: fit_two_naive_bayes(&x, &s, &y, 0.1).unwrap(),
            spec: InterventionSpec::new(InterventionKind::TwoNb, 0.1),
        };
        assert!(model.predict(&x, None).is_err());
        assert!(model.predict(&x, Some(&s)).is_ok());
    }
}
