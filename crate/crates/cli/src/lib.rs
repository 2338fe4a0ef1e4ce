//! Experiment driver for the `planar-density` command.

pub mod config;
pub mod experiments;
pub mod table;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::run;
pub use table::{Format, Report};
