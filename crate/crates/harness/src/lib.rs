//! Experiment runner for the `hamkrylov` methods: convergence curves against
//! dense references, φ-mode consistency, estimator tables, timings and
//! Matrix Market export.

pub mod config;
pub mod experiments;
pub mod export;
pub mod oracle;

pub use config::{RunConfig, OUT_ENV};
