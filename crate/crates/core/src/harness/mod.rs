//! Experiment harness behind the `lowrank-agd` command-line tool.
//!
//! Each subcommand resolves an [`ExperimentConfig`] (built-in defaults, then
//! an optional flat TOML file, then flags) and writes deterministic CSVs:
//! trial `i` draws its initialization from stream `i` of the base seed and
//! target matrix `k` from streams `2⁶³ + 2k` and `2⁶³ + 2k + 1` of the matrix
//! seed, independently of how trials are scheduled across threads.

pub mod checks;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod montecarlo;
pub mod output;
pub mod verify;

pub use config::{ConfigOverrides, EtaMode, ExperimentConfig, ExperimentKind};
pub use experiments::{run_experiment, theory, ExperimentOutput, Instance, TrialOutcome};
pub use montecarlo::{run_montecarlo, ConcentrationRow};
pub use output::{SummaryRow, TrajectoryRow};
pub use verify::{run_verify, VerifyOptions, VerifyReport};
