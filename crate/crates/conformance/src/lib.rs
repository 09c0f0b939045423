//! Bounded trace semantics and refinement checking.
//!
//! `contract_traces` and `composition_traces` enumerate the
//! prefix-closed set of visible traces a model can produce within a
//! depth bound; `refines` checks trace inclusion between a subject
//! and a contract through a label map and reports the shortest
//! counterexample when inclusion fails.

pub mod refine;
pub mod traces;

pub use refine::{
    refines, refines_sets, refines_with, ConformanceReport, LabelMap, MapEntry, RefineError,
    Verdict,
};
pub use traces::{
    composition_traces, contract_traces, TraceError, TraceOptions, TraceSet, DEFAULT_CONFIG_CAP,
};
