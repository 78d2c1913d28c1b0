//! Config-driven experiment runner for discretized nonlocal dispersal
//! operators. Scenario files are TOML; results are CSV tables and a
//! plain-text report with PASS/FAIL verdicts.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;

pub use config::{apply_seed_override, echo, parse_config, parse_config_str, ScenarioConfig};
pub use error::{CliError, Result};
pub use run::{emit_csv, run, run_all, write_artifacts, Payload, RunReport, Table, Verdict};
