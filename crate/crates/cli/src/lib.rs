//! Command-line orchestration for `bhdephase`: configuration layering,
//! scenario and sweep runners, method comparison, and file formats.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Horizon, Method, Momentum, RawConfig, ScenarioConfig};
pub use error::CliError;
pub use run::{compare_methods, evaluate, run_scenario, run_sweep};
