//! Post-hoc synthesis of benchmark records: stability statistics, robust
//! measure correlations, variant comparisons, tradeoff point sets, and
//! scatter-plot emission.

pub mod compare;
pub mod robust;
pub mod stability;
pub mod svg;

pub use compare::{tradeoff_points, variant_compare, PairedPoint, TradeoffPoint};
pub use robust::{correlation_matrix, sd_correlation, sd_outlyingness, CorrelationMatrix};
pub use stability::{stability, StabilitySummary};
pub use svg::{emit_scatter_svg, render_scatter_svg, RectSpec, Series};
