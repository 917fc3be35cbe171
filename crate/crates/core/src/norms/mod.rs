//! Hölder and Besov estimators, curve geometry and diagnostic traces.

pub mod besov;
pub mod geometry;
pub mod holder;
pub mod trace;

pub use besov::{besov_seminorm, BesovReport};
pub use geometry::{arc_chord, arc_chord_report, q_quantity, ArcChordReport};
pub use holder::{derivative_sup_norm, holder_seminorm, seminorm, HolderReport};
pub use trace::{
    format_csv_number, weighted_trace_update, DiagnosticsTrace, TraceRecord, TraceSpec,
    WeightedOrder,
};
