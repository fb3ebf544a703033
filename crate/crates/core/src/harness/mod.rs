//! Command-line orchestration: configs, the time loop, convergence studies
//! and CSV output.

pub mod config;
pub mod run;
pub mod snapshot;

pub use config::{load_config, parse_config, RunConfig, Scheme};
pub use run::{convergence_study, run, run_with_exec, study_csv, RunOutcome, RunStats, Stepper, StudyRow};
pub use snapshot::{read_snapshot, snapshot, snapshot_csv};
