//! Experiment definitions and execution: worlds, camera placement,
//! Monte Carlo trials and their summaries.

pub mod build;
pub mod config;
pub mod presets;
pub mod run;

pub use build::{build_coordination_neighborhoods, build_instance, Instance};
pub use config::{Algorithm, Experiment, ScenarioConfig, Variant};
pub use presets::{preset, preset_ids, preset_source, preset_with};
pub use run::{
    run_experiment, run_trial, AlgorithmResult, AlgorithmSummary, BoundSummary, CoverageStats, CurvePoint, EvaluationAudit, ExperimentOptions,
    ExperimentResult, MeanStd, SeriesRow, TrialOptions, TrialResult, VariantResult,
};

use crate::error::Result;
use crate::objective::CoverageWorld;

/// The eight-camera street-block world.
pub fn build_urban_preset() -> Result<CoverageWorld> {
    let e = preset("urban")?;
    Ok(build_instance(&e.variants[0].config, 0)?.world)
}
