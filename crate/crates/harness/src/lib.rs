//! Experiment runner for comparing replay sampling strategies.
//!
//! A sweep expands an [`config::ExperimentConfig`] into one training run per
//! (strategy, beta, seed), writes one metrics CSV per run plus a merged CSV,
//! and offers post-processing: [`compare`] summaries, cluster histograms
//! ([`report`]), sampler audits ([`audit`]) and SVG reward curves ([`plot`]).

pub mod audit;
pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod plot;
pub mod report;

pub use error::{HarnessError, Result};
