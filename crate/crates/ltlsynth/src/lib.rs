//! File formats, simulator, case-study drivers and CLI support for
//! `ltlsynth-core`.

pub mod case_study;
pub mod formats;
pub mod lp;
pub mod simulate;
