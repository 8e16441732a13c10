//! Scenario runner, throughput metric, slope estimation and CSV output.

pub mod config;
pub mod csv;
pub mod scenario;
pub mod slope;
pub mod slopes;
pub mod throughput;

pub use config::ExperimentConfig;
pub use csv::{write_csv, CurvePoint, CSV_HEADER};
pub use scenario::run_scenario;
pub use slope::diversity_slope;
pub use throughput::{rate_adapted_throughput, throughput_metric, ThresholdSource, ThroughputScan};
