//! Core library for benchmarking fairness-aware classifiers on tabular data.
//!
//! The pieces fit together as a pipeline: [`data`] loads and validates
//! datasets, [`preprocess`] produces the standardized variants and split
//! plans, [`learners`] and [`interventions`] train models, [`metrics`]
//! evaluates predictions under the full measure suite, and [`analysis`]
//! summarizes stability and inter-measure correlation across runs.

pub mod analysis;
pub mod data;
pub mod error;
pub mod interventions;
pub mod learners;
pub mod matrix;
pub mod metrics;
pub mod preprocess;
pub mod rng;

pub use error::{Error, Result};
