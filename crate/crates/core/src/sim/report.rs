//! Aggregated experiment results and their CSV/JSON export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::config::{ExperimentConfig, RuleConfig};
use crate::sim::runner::{GENERATOR, SEED_SCHEME};
use crate::stopping::StoppingRule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub rule: String,
    pub kind: StoppingRule,
    pub alpha: Option<f64>,
    pub t_stop: Option<f64>,
    /// `‖f^t̂ - f*‖²_n`.
    pub error: Option<f64>,
    pub hit_boundary: bool,
    pub failure: Option<String>,
}

impl TrialRecord {
    pub(crate) fn failed(n: usize, trial: usize, seed: u64, rule: &RuleConfig, err: &Error) -> Self {
        Self {
            n,
            trial,
            seed,
            rule: rule.label(),
            kind: rule.name,
            alpha: None,
            t_stop: None,
            error: None,
            hit_boundary: false,
            failure: Some(err.to_string()),
        }
    }
}

/// Sample mean and standard error `s/sqrt(m)` (zero for a single value).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let (_, se) = mean_se(values);
    se * se * values.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rule: String,
    pub n: usize,
    pub trials: usize,
    pub failures: usize,
    pub mean_error: f64,
    pub se_error: f64,
    pub mean_t_stop: f64,
    pub se_t_stop: f64,
    pub boundary_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub generator: String,
    pub seed_scheme: String,
    pub summaries: Vec<RuleSummary>,
    /// Sorted by `(n, trial, rule order in the config)`.
    pub records: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, records: Vec<TrialRecord>) -> Self {
        let mut groups: BTreeMap<(usize, usize), Vec<&TrialRecord>> = BTreeMap::new();
        let order: BTreeMap<String, usize> = config.rules.iter().enumerate().map(|(j, r)| (r.label(), j)).collect();
        for rec in &records {
            groups.entry((order[&rec.rule], rec.n)).or_default().push(rec);
        }
        let summaries = groups
            .into_iter()
            .map(|((j, n), recs)| {
                let ok: Vec<&&TrialRecord> = recs.iter().filter(|r| r.failure.is_none()).collect();
                let errors: Vec<f64> = ok.iter().filter_map(|r| r.error).collect();
                let times: Vec<f64> = ok.iter().filter_map(|r| r.t_stop).collect();
                let (mean_error, se_error) = mean_se(&errors);
                let (mean_t_stop, se_t_stop) = mean_se(&times);
                let boundary = ok.iter().filter(|r| r.hit_boundary).count();
                RuleSummary {
                    rule: config.rules[j].label(),
                    n,
                    trials: recs.len(),
                    failures: recs.len() - ok.len(),
                    mean_error,
                    se_error,
                    mean_t_stop,
                    se_t_stop,
                    boundary_rate: if ok.is_empty() { f64::NAN } else { boundary as f64 / ok.len() as f64 },
                }
            })
            .collect();
        Self { config, generator: GENERATOR.into(), seed_scheme: SEED_SCHEME.into(), summaries, records }
    }

    pub fn summary(&self, rule: &str, n: usize) -> Option<&RuleSummary> {
        self.summaries.iter().find(|s| s.rule == rule && s.n == n)
    }

    /// Successful records of one rule at one sample size.
    pub fn records_for<'a>(&'a self, rule: &'a str, n: usize) -> impl Iterator<Item = &'a TrialRecord> + 'a {
        self.records.iter().filter(move |r| r.rule == rule && r.n == n && r.failure.is_none())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::numeric(format!("cannot serialize report: {e}")))
    }

    /// Mean and standard error per rule and sample size.
    pub fn errors_by_n_csv(&self) -> String {
        let mut out = String::from("rule,n,trials,failures,mean_error,se_error,mean_t_stop,se_t_stop,boundary_rate\n");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.rule,
                s.n,
                s.trials,
                s.failures,
                fmt_float(s.mean_error),
                fmt_float(s.se_error),
                fmt_float(s.mean_t_stop),
                fmt_float(s.se_t_stop),
                fmt_float(s.boundary_rate)
            );
        }
        out
    }

    /// One row per trial and rule, for histograms and paired comparisons.
    pub fn stopping_times_csv(&self) -> String {
        let mut out = String::from("n,trial,seed,rule,alpha,t_stop,error,hit_boundary,failure\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                r.trial,
                r.seed,
                r.rule,
                opt_float(r.alpha),
                opt_float(r.t_stop),
                opt_float(r.error),
                r.hit_boundary,
                r.failure.as_deref().map(csv_text).unwrap_or_default()
            );
        }
        out
    }

    /// Writes `report.json`, `errors_by_n.csv`, and `stopping_times.csv`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::config(format!("cannot write to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("report.json"), self.to_json()?).map_err(io)?;
        std::fs::write(dir.join("errors_by_n.csv"), self.errors_by_n_csv()).map_err(io)?;
        std::fs::write(dir.join("stopping_times.csv"), self.stopping_times_csv()).map_err(io)?;
        Ok(())
    }
}

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn csv_text(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(&[7.0]), (7.0, 0.0));
        assert!((sample_variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }
}
