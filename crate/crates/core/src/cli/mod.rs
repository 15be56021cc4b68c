//! Scenario files, dataset emission and the verification suite.

pub mod config;
pub mod emit;
pub mod run;
pub mod verify;

pub use config::{Mode, Scenario};
pub use emit::{csv_bytes, emit_csv, format_float, json_bytes, Table};
pub use run::{exit_code, prepare, random_triangle, run, Command, Outputs, RunOptions};
pub use verify::{verify_outputs, verify_suite, CriterionResult};
