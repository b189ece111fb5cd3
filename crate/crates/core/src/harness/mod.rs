//! End-to-end runs, logs, metrics and cross-run comparison.

pub mod compare;
pub mod config;
pub mod log;
pub mod metrics;
pub mod run;

pub use compare::{compare, ComparisonReport, CompareError};
pub use config::{Budget, ConfigError, RunConfig, SeedingConfig, Variant};
pub use log::{Event, LogError, RunLog};
pub use metrics::{compute_metrics, MetricsError, RunMetrics};
pub use run::{provider_for, run, run_with, RunError};
