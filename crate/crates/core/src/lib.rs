//! Kernel regression with spectral filters (gradient descent, kernel ridge)
//! and data-driven early stopping.
//!
//! The flow is: build the normalized Gram matrix, diagonalize it once
//! ([`kernel::eigensystem`]), rotate the responses into the eigenbasis
//! ([`kernel::rotate`]), and then evaluate filters, risks, and stopping rules
//! coordinate-wise.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complexity;
pub mod error;
pub mod estimators;
pub mod filter;
pub mod io;
pub mod kernel;
pub mod sim;
pub mod stopping;

pub use complexity::{
    assumption_audit, critical_radius, kernel_complexity, statistical_dimension, AssumptionAudit, CriticalRadiusResult,
    CriticalRadiusSolver,
};
pub use error::{Error, Result};
pub use estimators::{
    default_alpha, estimate_beta, estimate_beta_with, estimate_sigma_auto, estimate_sigma_finite_rank,
    estimate_sigma_smoothed, AlphaChoice, BetaMethod, NoiseEstimate, NoiseMethod,
};
pub use filter::{
    empirical_risk_full, expected_empirical_risk, expected_smoothed_risk, fit_at_time, oracle_decomposition, predict,
    shrinkage_gamma, smoothed_reduced_risk, squared_error, EtaChoice, FilterFamily, FilterPolicy, FilterSpec, Fit,
    OracleDecomposition,
};
pub use io::{load_dataset, parse_dataset, Dataset};
pub use kernel::{
    build_gram, eigensystem, eigenvalues, eval_kernel, rotate, DesignSample, EigenSystem, KernelKind, RotatedSample,
    DEFAULT_RANK_TOL,
};
pub use stopping::{
    balancing_stop, fold_partition, holdout_split, holdout_stop, local_complexity_stop, mdp_stop, mdp_threshold,
    oracle_stop, theoretical_mdp_stop, vfold_stop, OracleMode, StoppingOutcome, StoppingRule, DEFAULT_FOLDS,
};
