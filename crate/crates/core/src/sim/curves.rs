//! Bias, variance, risk, and empirical-risk trajectories over a time grid.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{empirical_risk_full, oracle_decomposition, smoothed_reduced_risk, FilterSpec};
use crate::kernel::{EigenSystem, RotatedSample};
use crate::sim::config::ExperimentConfig;
use crate::sim::report::fmt_float;
use crate::sim::runner::{trial_seed, TrialContext};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t: f64,
    pub bias2: f64,
    pub variance: f64,
    pub risk: f64,
    pub empirical_risk: f64,
    pub reduced_risk: f64,
}

/// `points` times spaced evenly in `log t` on `[t_min, t_max]`.
pub fn log_time_grid(spec: &FilterSpec, points: usize) -> Vec<f64> {
    let (lo, hi) = (spec.t_min().ln(), spec.t_max.ln());
    match points {
        0 => Vec::new(),
        1 => vec![spec.t_max],
        _ => (0..points)
            .map(|k| if k + 1 == points { spec.t_max } else { (lo + (hi - lo) * k as f64 / (points - 1) as f64).exp() })
            .collect(),
    }
}

pub fn emit_curves(rot: &RotatedSample, eig: &EigenSystem, spec: &FilterSpec, t_grid: &[f64]) -> Result<Vec<CurveRow>> {
    t_grid
        .iter()
        .map(|&t| {
            let d = oracle_decomposition(rot, eig, spec, t, 0.0, None)?;
            Ok(CurveRow {
                t,
                bias2: d.bias2,
                variance: d.variance,
                risk: d.risk,
                empirical_risk: empirical_risk_full(rot, eig, spec, t)?,
                reduced_risk: smoothed_reduced_risk(rot, eig, spec, t, 0.0)?,
            })
        })
        .collect()
}

/// Curves for the first trial at sample size `n` of an experiment.
pub fn curves_for_config(config: &ExperimentConfig, n: usize, points: usize) -> Result<Vec<CurveRow>> {
    config.validate()?;
    if points < 2 {
        return Err(Error::input("a curve needs at least two points"));
    }
    let k = config.n_grid.iter().position(|&m| m == n).unwrap_or(0);
    let ctx = TrialContext::build(config, n, trial_seed(config, k, 0))?;
    emit_curves(&ctx.rot, &ctx.eig, &ctx.spec, &log_time_grid(&ctx.spec, points))
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("t,bias2,variance,risk,empirical_risk,reduced_risk\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(r.t),
            fmt_float(r.bias2),
            fmt_float(r.variance),
            fmt_float(r.risk),
            fmt_float(r.empirical_risk),
            fmt_float(r.reduced_risk)
        );
    }
    out
}
