//! File formats, experiment runner and command-line front end for
//! [`matchkit_core`].
//!
//! - [`format`]: the JSON market and matching documents.
//! - [`solve`]: algorithm selection, verification reports and trace CSVs.
//! - [`experiment`]: seeded multi-market experiments and operation-count
//!   benchmarks.

pub mod experiment;
pub mod format;
pub mod solve;

pub use matchkit_core as core;
