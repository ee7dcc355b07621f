//! Command-line runner for the experiments.
//!
//! `lfpp run <experiment>` resolves a layered configuration, runs the
//! experiment, writes its outputs and a manifest with SHA-256 digests, and
//! exits non-zero when a check fails. `lfpp verify <manifest>` re-checks the
//! digests and can re-execute the run from the manifest's config echo.

pub mod app;
pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod output;

pub use app::{run_cli, run_experiment, verify, RunOutcome};
pub use error::{exit, CliError, CliResult};
