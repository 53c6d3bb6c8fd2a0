//! Fixtures shared by the benchmarks.

use earlystop::sim::{Design, ExperimentConfig, NoisePolicy, RegressionFunction, RuleConfig, TrialContext};
use earlystop::{FilterFamily, FilterPolicy, KernelKind, StoppingRule};

pub fn sobolev_config(rules: &[StoppingRule]) -> ExperimentConfig {
    ExperimentConfig {
        kernel: KernelKind::SobolevMin,
        filter: FilterPolicy::new(FilterFamily::GradientDescent),
        target: RegressionFunction::PiecewiseLinear,
        design: Design::Equidistant,
        sigma: 0.15,
        sigma2: NoisePolicy::Known,
        n_grid: vec![200],
        n_trials: 1,
        rules: rules.iter().map(|&r| RuleConfig::new(r)).collect(),
        master_seed: 1,
    }
}

/// Gram eigensystem, filter, and rotated responses for one seeded dataset.
pub fn sobolev_context(n: usize) -> TrialContext {
    TrialContext::build(&sobolev_config(&[StoppingRule::Mdp]), n, 42).expect("fixture dataset")
}

pub fn equidistant(n: usize) -> Vec<f64> {
    (1..=n).map(|j| j as f64 / n as f64).collect()
}
