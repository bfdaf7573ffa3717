//! Command-line front end for `subcycle-core`: JSON configuration, scenario
//! orchestration, deterministic artifact bundles (CSV, SVG, manifest) and the
//! comparison of bundles against the reference acceptance table.

pub mod bundle;
pub mod compare;
pub mod config;
pub mod error;
pub mod scenario;
pub mod svg;
pub mod table;

pub use bundle::Bundle;
pub use config::{ExperimentConfig, Scenario};
pub use error::{AppError, AppResult};
