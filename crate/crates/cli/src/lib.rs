//! Config-driven experiment runner over `logit-core`.
//!
//! Four entry points mirror the binary's subcommands: [`run_analyze`],
//! [`run_verify`], [`run_simulate`] and [`run_sweep`]. Each writes CSV files
//! that start with a `# config_hash=...,seed=...` comment row.

pub mod analyze;
pub mod config;
pub mod error;
pub mod output;
pub mod simulate;
pub mod suite;
pub mod sweep;
pub mod verify;

pub use analyze::run_analyze;
pub use config::{BetaSpec, ExperimentConfig, Overrides};
pub use error::{CliError, Result};
pub use simulate::run_simulate;
pub use sweep::run_sweep;
pub use verify::{run_verify, VerifySummary};
