//! Configuration-driven refinement studies and result emission.

pub mod config;
pub mod output;
pub mod suite;

pub use config::{default_params, parse_config, parse_config_file, ExperimentConfig, SuiteConfig, Variant};
pub use output::{emit_results, read_table, table_rows, write_snapshot, Snapshot, TableRow};
pub use suite::{
    nm_diagnostic, overshoot, run_experiment, run_experiment_with, run_single, run_suite, RunRecord, RunReport,
};
