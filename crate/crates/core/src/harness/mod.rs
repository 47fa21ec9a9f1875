//! Lemma-verification dispatch, experiment orchestration, configuration and
//! machine-readable reporting.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod lemmas;
pub mod report;

pub use config::{resolve_config, ConfigOverrides, ExperimentConfig, ExperimentKind, ReportFormat, Sweep};
pub use experiment::{assert_suite_complete, fast_suite, full_suite, run_experiment, Item};
pub use lemmas::{lemma_check, CheckOutcome, LemmaCheckResult, Params, LEMMA_IDS};
pub use report::{emit_report, plot_path, write_atomic, Report, ResultRecord, SweepPoint, Versions, SCHEMA_VERSION};
