//! Error-sweep experiments and reference oracles for the `tssq` library.
//!
//! Three experiments measure how the singularity-swap engine degrades (or
//! does not) as targets approach a curve: a scalar prototype integral on
//! [-1, 1] with a closed-form reference, a slender-body sweep along an open
//! tangled filament, and the same sweep around a closed starfish curve. All
//! reference values come from this crate's own oracles — closed-form
//! recurrences and graded-panel quadrature, both in double-double
//! arithmetic — so the library under test never certifies itself.
//!
//! The `tssq` binary exposes the experiments as `tssq run <experiment>`
//! and writes one CSV row per (distance, method, power).

pub mod experiments;
pub mod oracle;
pub mod report;
pub mod targets;
