//! Scenario files, deterministic sweep generation, and CSV reporting for
//! the railguard simulator. The `railguard` binary wires these into the
//! `validate`, `run`, and `sweep` subcommands.

pub mod generate;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use generate::seed_trains;
pub use scenario::{load_scenario, parse_scenario};
pub use sweep::{parse_counts, run_sweep, SweepSpec};
