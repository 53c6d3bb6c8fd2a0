//! Simulation harness: regression functions, seeded datasets, the trial
//! runner, and report export.

pub mod config;
pub mod curves;
pub mod functions;
pub mod report;
pub mod runner;

pub use config::{AlphaPolicy, Design, ExperimentConfig, NoisePolicy, RuleConfig, DEFAULT_N_GRID};
pub use curves::{curves_csv, curves_for_config, emit_curves, log_time_grid, CurveRow};
pub use functions::RegressionFunction;
pub use report::{fmt_float, mean_se, sample_variance, ExperimentReport, RuleSummary, TrialRecord};
pub use runner::{
    derive_seed, generate_dataset, run_experiment, run_trial, splitmix64, trial_seed, TrialContext, GENERATOR,
    SEED_SCHEME,
};
