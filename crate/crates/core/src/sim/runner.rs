//! Seeded data generation and the trial loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    default_alpha, estimate_beta, estimate_sigma_auto, estimate_sigma_finite_rank, estimate_sigma_smoothed, NoiseMethod,
};
use crate::filter::{squared_error_unchecked, FilterSpec};
use crate::kernel::{build_gram, eigensystem, rotate, DesignSample, EigenSystem, RotatedSample, DEFAULT_RANK_TOL};
use crate::sim::config::{AlphaPolicy, Design, ExperimentConfig, NoisePolicy, RuleConfig};
use crate::sim::report::{ExperimentReport, TrialRecord};
use crate::stopping::{
    balancing_stop, holdout_stop, local_complexity_stop, mdp_stop, oracle_stop, theoretical_mdp_stop, vfold_stop,
    StoppingOutcome, StoppingRule,
};

/// Identity of the noise generator, echoed in reports.
pub const GENERATOR: &str = "rand_chacha::ChaCha8Rng seeded by seed_from_u64; rand_distr::StandardNormal (ziggurat)";

/// Description of how trial seeds are derived, echoed in reports.
pub const SEED_SCHEME: &str = "trial seed = splitmix64(master_seed + (k + 1) * 0x9E3779B97F4A7C15) with \
k = n_index * n_trials + trial; split seed of rule j = splitmix64(trial_seed + (j + 1) * 0x9E3779B97F4A7C15)";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One output of the splitmix64 generator whose state is `state`.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `k`-th seed of the stream rooted at `base`.
pub fn derive_seed(base: u64, k: u64) -> u64 {
    splitmix64(base.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn trial_seed(config: &ExperimentConfig, n_index: usize, trial: usize) -> u64 {
    derive_seed(config.master_seed, (n_index * config.n_trials + trial) as u64)
}

/// Sample of size `n` with noise drawn from the trial seed, plus the
/// noiseless values `F*`.
pub fn generate_dataset(config: &ExperimentConfig, n: usize, seed: u64) -> Result<(DesignSample, Vec<f64>)> {
    if n < 2 {
        return Err(Error::input("sample size must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = match config.design {
        Design::Equidistant => (1..=n).map(|j| j as f64 / n as f64).collect(),
        Design::UniformRandom => (0..n).map(|_| rng.gen::<f64>()).collect(),
    };
    let f_star = config.target.eval_all(&xs);
    let ys: Vec<f64> = f_star.iter().map(|f| f + config.sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    Ok((DesignSample::new(xs, ys)?, f_star))
}

/// Everything a rule may need about one realized dataset.
pub struct TrialContext {
    pub sample: DesignSample,
    pub eig: EigenSystem,
    pub spec: FilterSpec,
    pub rot: RotatedSample,
}

impl TrialContext {
    pub fn build(config: &ExperimentConfig, n: usize, seed: u64) -> Result<Self> {
        let (sample, f_star) = generate_dataset(config, n, seed)?;
        let eig = eigensystem(&build_gram(config.kernel, sample.xs())?, DEFAULT_RANK_TOL)?;
        let spec = config.filter.resolve(&eig)?;
        let rot = rotate(&eig, sample.ys(), Some(&f_star), Some(config.sigma * config.sigma))?;
        Ok(Self { sample, eig, spec, rot })
    }

    /// `‖f^t - f*‖²_n`.
    pub fn error_at(&self, t: f64) -> f64 {
        let g = self.rot.g_star.as_deref().expect("trial context always carries G*");
        squared_error_unchecked(&self.rot.z, g, &self.eig, &self.spec, t.min(self.spec.t_max))
    }

    pub fn noise_level(&self, policy: NoisePolicy) -> Result<f64> {
        let est = match policy {
            NoisePolicy::Known => return Ok(self.rot.sigma2.expect("trial context always carries sigma2")),
            NoisePolicy::Estimate(NoiseMethod::FiniteRankTail) => estimate_sigma_finite_rank(&self.rot, &self.eig)?,
            NoisePolicy::Estimate(NoiseMethod::SmoothedResidual) => {
                estimate_sigma_smoothed(&self.rot, &self.eig, &self.spec, None)?
            }
            NoisePolicy::EstimateAuto => estimate_sigma_auto(&self.rot, &self.eig, &self.spec)?,
        };
        Ok(est.sigma2_hat)
    }

    pub fn alpha(&self, policy: AlphaPolicy) -> Result<f64> {
        match policy {
            AlphaPolicy::Fixed(a) => Ok(a),
            AlphaPolicy::Auto => Ok(default_alpha(estimate_beta(&self.eig)?).alpha),
        }
    }

    /// Applies one configured rule.
    pub fn stop(&self, config: &ExperimentConfig, rule: &RuleConfig, split_seed: u64) -> Result<StoppingOutcome> {
        match rule.name {
            StoppingRule::Mdp | StoppingRule::SmoothedMdp => {
                let alpha = self.alpha(rule.alpha_policy())?;
                let mut out = mdp_stop(&self.rot, &self.eig, &self.spec, alpha, self.noise_level(config.sigma2)?)?;
                out.rule = rule.name;
                Ok(out)
            }
            StoppingRule::TheoreticalMdp => {
                theoretical_mdp_stop(&self.rot, &self.eig, &self.spec, self.alpha(rule.alpha_policy())?)
            }
            StoppingRule::Balancing => {
                balancing_stop(&self.rot, &self.eig, &self.spec, self.alpha(rule.alpha_policy())?)
            }
            StoppingRule::Oracle => oracle_stop(&self.rot, &self.eig, &self.spec, rule.oracle_mode.unwrap_or_default()),
            StoppingRule::LocalComplexity => {
                local_complexity_stop(&self.eig, &self.spec, config.sigma, rule.radius.unwrap_or(1.0))
            }
            StoppingRule::HoldOut => holdout_stop(&self.sample, config.kernel, &config.filter, split_seed),
            StoppingRule::VFold => vfold_stop(&self.sample, config.kernel, &config.filter, rule.folds(), split_seed),
        }
    }
}

/// Runs every configured rule on one dataset. Rule failures become records
/// with an error message.
pub fn run_trial(config: &ExperimentConfig, n: usize, trial: usize, seed: u64) -> Result<Vec<TrialRecord>> {
    let ctx = TrialContext::build(config, n, seed)?;
    let records = config
        .rules
        .iter()
        .enumerate()
        .map(|(j, rule)| {
            let split_seed = derive_seed(seed, j as u64);
            let base = TrialRecord {
                n,
                trial,
                seed,
                rule: rule.label(),
                kind: rule.name,
                alpha: None,
                t_stop: None,
                error: None,
                hit_boundary: false,
                failure: None,
            };
            match ctx.stop(config, rule, split_seed) {
                Ok(out) => TrialRecord {
                    alpha: out.alpha,
                    t_stop: Some(out.t_stop),
                    error: Some(ctx.error_at(out.t_stop)),
                    hit_boundary: out.hit_boundary,
                    ..base
                },
                Err(e) => TrialRecord { failure: Some(e.to_string()), ..base },
            }
        })
        .collect();
    Ok(records)
}

/// Runs `n_trials` trials at every sample size. Trials run in parallel; the
/// result does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let jobs: Vec<(usize, usize, usize)> = config
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| (0..config.n_trials).map(move |trial| (k, n, trial)))
        .collect();
    let chunks: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(k, n, trial)| {
            let seed = trial_seed(config, k, trial);
            run_trial(config, n, trial, seed).unwrap_or_else(|e| {
                config.rules.iter().map(|rule| TrialRecord::failed(n, trial, seed, rule, &e)).collect()
            })
        })
        .collect();
    Ok(ExperimentReport::new(config.clone(), chunks.into_iter().flatten().collect()))
}
