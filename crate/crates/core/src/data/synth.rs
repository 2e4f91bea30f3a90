//! Synthetic two-group dataset with a controllable base-rate gap.
//!
//! Used as a test fixture and as the `synth` dataset in the pipeline so the
//! full benchmark can run without any real data files.

use crate::data::schema::{ColumnKind, Role, SensitiveSpec};
use crate::data::table::{Cell, Column, Origin, RawTable};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const SYNTH_DATASET: &str = "synth";
pub const SYNTH_SENSITIVE: &str = "group";
pub const SYNTH_PRIVILEGED: &str = "a";

/// Generate a two-group table where the privileged/unprivileged positive-rate
/// gap is `bias` in expectation. Deterministic given the seed.
///
/// Columns: two numeric features carrying label signal (`x2` also carries
/// group signal, so group membership is learnable from features), one noise
/// categorical feature to exercise one-hot encoding, the sensitive `group`
/// column, and a binary `outcome` label.
pub fn synth_generate(n: usize, bias: f64, seed: u64) -> Result<RawTable> {
    if n < 20 {
        return Err(Error::Load(format!("synthetic table needs n >= 20, got {n}")));
    }
    if !(0.0..=1.0).contains(&bias) {
        return Err(Error::Load(format!("bias must lie in [0,1], got {bias}")));
    }
    let mut rng = SplitMix64::new(seed);
    let p_priv_pos = 0.5 + bias / 2.0;
    let p_unpriv_pos = 0.5 - bias / 2.0;
    let colors = ["red", "green", "blue"];

    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let privileged = rng.bernoulli(0.5);
        let p_pos = if privileged { p_priv_pos } else { p_unpriv_pos };
        let y = if rng.bernoulli(p_pos) { 1.0 } else { 0.0 };
        let label_sign = 2.0 * y - 1.0;
        let group_sign = if privileged { 1.0 } else { -1.0 };
        let x1 = label_sign + rng.normal();
        let x2 = 0.5 * label_sign + 0.75 * group_sign + rng.normal();
        let color = colors[rng.below(3)];
        rows.push(vec![
            Cell::Num(x1),
            Cell::Num(x2),
            Cell::Cat(color.to_string()),
            Cell::Cat(if privileged { "a" } else { "b" }.to_string()),
            Cell::Num(y),
        ]);
    }

    let table = RawTable {
        dataset: SYNTH_DATASET.to_string(),
        columns: vec![
            Column { name: "x1".into(), kind: ColumnKind::Numeric, role: Role::Feature, origin: Origin::Plain },
            Column { name: "x2".into(), kind: ColumnKind::Numeric, role: Role::Feature, origin: Origin::Plain },
            Column { name: "color".into(), kind: ColumnKind::Categorical, role: Role::Feature, origin: Origin::Plain },
            Column { name: SYNTH_SENSITIVE.into(), kind: ColumnKind::Categorical, role: Role::Sensitive, origin: Origin::Plain },
            Column { name: "outcome".into(), kind: ColumnKind::Numeric, role: Role::Label, origin: Origin::Plain },
        ],
        rows,
        sensitive: vec![SensitiveSpec {
            column: SYNTH_SENSITIVE.into(),
            privileged_value: SYNTH_PRIVILEGED.into(),
        }],
        label: "outcome".into(),
    };
    table.validate()?;
    Ok(table)
}
