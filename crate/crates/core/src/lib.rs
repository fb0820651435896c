//! Visual-variation robustness benchmarks for vision-language models.
//!
//! The crate generates controlled variation datasets (position, scale,
//! orientation, context) and synthetic perception tasks, drives
//! chat-completions endpoints over the resulting manifests, and scores
//! robustness with consistency and output-stability metrics. Component-level
//! diagnostics (token decoding, linear probes, alignment gaps) operate on
//! exported feature matrices.

pub mod cli;
pub mod diagnostics;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod report;
pub mod variation;
pub mod synth;
