// `!(x > 0)` validation also rejects NaN, unlike `x <= 0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment harness for the bilevel VI solver: configuration parsing,
//! seeded replicated runs, CSV persistence, and summary reports.

pub mod config;
pub mod error;
pub mod experiment;
pub mod summary;

pub use config::{ExperimentConfig, ProblemId, Timing};
pub use error::{CliError, Result};
pub use experiment::{run_experiment, KSummary, SummaryReport};
pub use summary::{
    aggregate, aggregate_csv, fit_slopes, parse_run_csv, run_csv, summarize, AggregateRow,
    SummarizedFiles,
};
