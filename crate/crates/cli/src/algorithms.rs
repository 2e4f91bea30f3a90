//! The benchmarked algorithm set: four plain learners and four
//! fairness-enhancing methods, with variant compatibility rules.

use fairbench_core::interventions::InterventionKind;
use fairbench_core::learners::LearnerKind;
use fairbench_core::preprocess::VariantTag;
use fairbench_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Baseline(LearnerKind),
    Intervention(InterventionKind),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Baseline(k) => k.as_str(),
            Algorithm::Intervention(k) => k.as_str(),
        }
    }

    pub fn parse(name: &str) -> Result<Algorithm> {
        if let Ok(kind) = LearnerKind::parse(name) {
            return Ok(Algorithm::Baseline(kind));
        }
        if let Ok(kind) = InterventionKind::parse(name) {
            return Ok(Algorithm::Intervention(kind));
        }
        Err(Error::Format(format!("unknown algorithm '{name}'")))
    }

    /// The default benchmark set: baselines first, then interventions.
    pub fn default_list() -> Vec<Algorithm> {
        LearnerKind::all()
            .into_iter()
            .map(Algorithm::Baseline)
            .chain(InterventionKind::all().into_iter().map(Algorithm::Intervention))
            .collect()
    }

    /// Why this algorithm cannot run on a variant, if it cannot.
    pub fn incompatibility(&self, variant: VariantTag) -> Option<&'static str> {
        match variant {
            VariantTag::Original => Some("requires numeric features (one-hot encoded variant)"),
            VariantTag::Numerical => match self {
                Algorithm::Baseline(_) => None,
                Algorithm::Intervention(kind) if kind.requires_binary_sensitive() => {
                    Some("requires numerical_binary (binary sensitive attribute)")
                }
                Algorithm::Intervention(_) => None,
            },
            VariantTag::NumericalBinary => None,
        }
    }

    /// Untuned parameter for single-run reporting; baselines have none.
    pub fn default_param(&self) -> Option<f64> {
        match self {
            Algorithm::Baseline(_) => None,
            Algorithm::Intervention(kind) => Some(kind.default_param()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_default_names() {
        for alg in Algorithm::default_list() {
            assert_eq!(Algorithm::parse(alg.name()).unwrap(), alg);
        }
        assert!(Algorithm::parse("mystery").is_err());
    }

    #[test]
    fn variant_compatibility_rules() {
        let two_nb = Algorithm::parse("two_nb").unwrap();
        let logreg = Algorithm::parse("logreg").unwrap();
        let repair = Algorithm::parse("di_remover").unwrap();
        assert!(two_nb.incompatibility(VariantTag::Numerical).is_some());
        assert!(two_nb.incompatibility(VariantTag::NumericalBinary).is_none());
        assert!(logreg.incompatibility(VariantTag::Numerical).is_none());
        assert!(repair.incompatibility(VariantTag::Numerical).is_none());
        for alg in Algorithm::default_list() {
            assert!(alg.incompatibility(VariantTag::Original).is_some());
        }
    }
}
