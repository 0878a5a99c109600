//! Configuration-driven experiments producing CSV tables and JSON summaries.

pub mod config;
pub mod run;
pub mod table;

pub use config::{parse_pairs, Count, ExperimentConfig, ExperimentKind, Fields};
pub use run::{
    execute, header, run, run_with_workers, summary_json, validate, with_suffix, write_outputs,
    Plan, RunOutput, Validated, VbSettings,
};
pub use table::{format_float, Cell, Table};
