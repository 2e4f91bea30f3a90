//! Dataset schemas, loading, cleaning, and the synthetic generator.

pub mod load;
pub mod schema;
pub mod synth;
pub mod table;
pub mod transforms;

pub use load::{load_dataset, LoadReport};
pub use schema::{ColumnKind, ColumnSpec, DatasetSchema, Predicate, Role, RowFilter, SensitiveSpec, Transform};
pub use synth::{synth_generate, SYNTH_DATASET, SYNTH_PRIVILEGED, SYNTH_SENSITIVE};
pub use table::{Cell, Column, Origin, RawTable};
pub use transforms::apply_dataset_transforms;
