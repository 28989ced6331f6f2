//! Reproducible experiments: TOML configurations, bundled presets, CSV
//! curves with a JSON manifest, and curve comparison.

mod compare;
mod config;
mod run;

pub use compare::{compare_curves, compare_files, read_curve, CompareMetric};
pub use config::{
    preset, ArraySpec, BoundKind, EstimatorKind, ExperimentConfig, FreqGrid, MergeSpec, SageOverrides, PRESETS,
};
pub use run::{config_hash, run_experiment, Curve, Manifest, RunOutput, Setup};
