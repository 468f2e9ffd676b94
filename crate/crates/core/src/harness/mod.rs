//! Monte-Carlo experiment runner: configurable near-extinction
//! experiments with deterministic trial-parallel execution and
//! machine-readable reports.

pub mod config;
pub mod experiments;
pub mod report;
pub mod validation;

pub use config::{suggested_grid, ExperimentConfig, ExperimentKind};
pub use experiments::{
    run_experiment, run_extinction_experiment, run_last_fragment_experiment,
    run_log_asymptotics, run_total_mass_experiment,
};
pub use report::{CheckResult, ExperimentReport, LevelSummary, Stat, REPORT_SCHEMA_VERSION};
pub use validation::{run_validation_suite, ValidationSuite};
