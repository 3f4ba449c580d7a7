//! Scenario runner for the `delaylight` model: JSON configuration with
//! explicit units, figure presets, parallel sweeps and CSV output.

pub mod config;
pub mod output;
pub mod presets;
pub mod scenarios;

pub use config::{validate_config, ConfigError, RawConfig, Scenario, ScenarioConfig};
pub use scenarios::{run, RunError};
