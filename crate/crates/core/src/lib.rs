//! Variation, metric derivatives, Hausdorff length and absolute-continuity
//! diagnostics for paths in metric spaces.
//!
//! A [`path::Path`] is a map from a closed interval into a [`metric::MetricSpace`].
//! The estimators in [`variation`], [`derivative`] and [`measures`] report
//! a status next to every value, and [`checks`] turns them into
//! hypothesis-guarded verdicts collected in [`report::CheckReport`]s.

pub mod cantor;
pub mod checks;
pub mod derivative;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod measures;
pub mod metric;
pub mod numeric;
pub mod path;
pub mod report;
pub mod variation;

pub use error::{Error, Result};
