//! Experiment harness for the levyglass toolkit: declarative configs,
//! seeded reproducibility, statistical reports, and file artifacts.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod output;
pub mod report;
pub mod runner;

pub use levyglass::stats::tv_plugin;
