//! Experiment harness behind the `plwe` binary: configs, campaigns, replay
//! and the analysis report.

pub mod analyze;
pub mod campaign;
pub mod config;

pub use analyze::{analyze, AnalyzeOptions, AnalyzeReport};
pub use campaign::{
    execute, prepare, replay, run_campaign, trial_input, CampaignError, CampaignReport, Execution, Prepared, Truth,
};
pub use config::{ConfigError, ExperimentConfig, OutputFormat, Validated};
