//! Experiment configuration (TOML or JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::NoiseMethod;
use crate::filter::{AutoOr, FilterPolicy};
use crate::kernel::KernelKind;
use crate::sim::functions::RegressionFunction;
use crate::stopping::{OracleMode, StoppingRule, DEFAULT_FOLDS};

/// Sample sizes used when a config omits `n_grid`.
pub const DEFAULT_N_GRID: [usize; 6] = [40, 80, 120, 200, 320, 400];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    /// `x_j = j/n`, `j = 1..n`.
    #[default]
    Equidistant,
    /// i.i.d. uniform on `[0, 1)`.
    UniformRandom,
}

/// Noise level handed to the data-driven discrepancy rules.
///
/// Wire form: `"known"`, `"estimate:finite_rank"`, `"estimate:smoothed"`, or
/// `"estimate:auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NoisePolicy {
    #[default]
    Known,
    Estimate(NoiseMethod),
    /// Tail estimator when the Gram matrix is rank deficient, smoothed otherwise.
    EstimateAuto,
}

impl TryFrom<String> for NoisePolicy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        let s = s.trim();
        if s == "known" {
            return Ok(NoisePolicy::Known);
        }
        match s.strip_prefix("estimate:") {
            Some("auto") => Ok(NoisePolicy::EstimateAuto),
            Some(m) => Ok(NoisePolicy::Estimate(m.parse()?)),
            None => Err(Error::config(format!("unknown noise policy {s:?}"))),
        }
    }
}

impl From<NoisePolicy> for String {
    fn from(p: NoisePolicy) -> String {
        match p {
            NoisePolicy::Known => "known".into(),
            NoisePolicy::Estimate(NoiseMethod::FiniteRankTail) => "estimate:finite_rank".into(),
            NoisePolicy::Estimate(NoiseMethod::SmoothedResidual) => "estimate:smoothed".into(),
            NoisePolicy::EstimateAuto => "estimate:auto".into(),
        }
    }
}

/// Smoothing level of a rule: fixed, or `1/(β̂ + 1)` from the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AutoOr", into = "AutoOr")]
pub enum AlphaPolicy {
    Auto,
    Fixed(f64),
}

impl TryFrom<AutoOr> for AlphaPolicy {
    type Error = Error;
    fn try_from(v: AutoOr) -> Result<Self> {
        Ok(v.parse("alpha")?.map_or(AlphaPolicy::Auto, AlphaPolicy::Fixed))
    }
}

impl From<AlphaPolicy> for AutoOr {
    fn from(v: AlphaPolicy) -> Self {
        match v {
            AlphaPolicy::Auto => AutoOr::Text("auto".into()),
            AlphaPolicy::Fixed(x) => AutoOr::Num(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    pub name: StoppingRule,
    /// Used by the discrepancy and balancing rules; ignored elsewhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaPolicy>,
    /// Report label; defaults to the rule name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    /// Norm bound `‖f*‖_H` for the complexity rule (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_mode: Option<OracleMode>,
}

impl RuleConfig {
    pub fn new(name: StoppingRule) -> Self {
        Self { name, alpha: None, label: None, folds: None, radius: None, oracle_mode: None }
    }

    pub fn with_alpha(mut self, alpha: AlphaPolicy) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.name.name().to_string())
    }

    pub fn folds(&self) -> usize {
        self.folds.unwrap_or(DEFAULT_FOLDS)
    }

    /// Smoothing policy with the rule's default (`0` for the plain rules,
    /// `auto` for the smoothed one).
    pub fn alpha_policy(&self) -> AlphaPolicy {
        self.alpha.unwrap_or(match self.name {
            StoppingRule::SmoothedMdp => AlphaPolicy::Auto,
            _ => AlphaPolicy::Fixed(0.0),
        })
    }
}

fn default_n_grid() -> Vec<usize> {
    DEFAULT_N_GRID.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kernel: KernelKind,
    pub filter: FilterPolicy,
    pub target: RegressionFunction,
    #[serde(default)]
    pub design: Design,
    /// True noise standard deviation.
    pub sigma: f64,
    /// Noise level used by the data-driven discrepancy rules.
    #[serde(default)]
    pub sigma2: NoisePolicy,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    pub n_trials: usize,
    pub rules: Vec<RuleConfig>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate().map_err(|e| Error::config(e.to_string()))?;
        self.target.validate()?;
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.n_trials == 0 {
            return Err(Error::config("n_trials must be at least 1"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::config("n_grid must not be empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n_grid must be strictly increasing"));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::config("sample sizes must be at least 2"));
        }
        if self.rules.is_empty() {
            return Err(Error::config("at least one rule is required"));
        }
        let mut labels: Vec<String> = self.rules.iter().map(RuleConfig::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("rule labels must be unique; set `label` to tell repeated rules apart"));
        }
        for rule in &self.rules {
            if let Some(AlphaPolicy::Fixed(a)) = rule.alpha {
                if !(0.0..=1.0).contains(&a) {
                    return Err(Error::config(format!("alpha must lie in [0, 1], got {a}")));
                }
            }
            if let Some(r) = rule.radius {
                if !(r > 0.0) {
                    return Err(Error::config(format!("radius must be positive, got {r}")));
                }
            }
            if rule.folds.is_some_and(|v| v < 2) {
                return Err(Error::config("folds must be at least 2"));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }
}
