//! Experiment harness: configuration, presets, and seeded Monte-Carlo
//! campaigns with CSV/JSON result emission.

mod config;
mod experiment;

pub use config::{
    BandConfig, ConfigError, ExperimentConfig, PolicyChoice, Preset, RadioConfig, SweepAxis,
    SweepSpec,
};
pub use experiment::{
    run_experiment, ExperimentKind, PointSummary, PolicyAggregate, RunOptions, SimError, Summary,
};
