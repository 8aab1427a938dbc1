//! Scenario runner for the shutter propagator: TOML configs in, plain-text
//! tables and a JSON metadata record out.

pub mod analysis;
pub mod config;
pub mod error;
pub mod run;
pub mod scenarios;

pub use config::ScenarioConfig;
pub use error::CliError;
