//! Experiment orchestration: Monte Carlo estimation, sweeps, CSV output,
//! configuration and figure recipes.

mod config;
mod csv;
mod metrics;
mod recipes;

pub use config::{parse_axis, AxisKind, ExperimentConfig, Scheme, SnrAxis};
pub use csv::{CsvTable, Manifest, ManifestFile, CODE_VERSION};
pub use metrics::{
    estimate_baseline, estimate_bler, estimate_bler_within, spec_for, sweep_adaptive, sweep_baseline, sweep_model,
    sweep_model_within, wald_ci95, MetricRecord, MIN_ERROR_EVENTS,
};
pub use recipes::{recipe_names, run_figure, Recipe, RecipeOptions, RecipeOutput, RECIPES};
