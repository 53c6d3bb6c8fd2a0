//! Plug-in estimates of the noise variance, the eigenvalue decay exponent,
//! and the smoothing level derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{smoothed_risk_unchecked, FilterSpec};
use crate::kernel::{EigenSystem, RotatedSample};

/// Horizon of the smoothed variance estimator, in units of `1/η`.
pub const DEFAULT_SMOOTHED_HORIZON: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethod {
    /// Mean square of the coordinates beyond the rank.
    FiniteRankTail,
    /// Residuals smoothed at `α = 1` at a late time `T`.
    SmoothedResidual,
}

impl std::str::FromStr for NoiseMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite_rank" | "finite-rank" | "tail" => Ok(NoiseMethod::FiniteRankTail),
            "smoothed" | "smoothed_residual" => Ok(NoiseMethod::SmoothedResidual),
            _ => Err(Error::input(format!("unknown noise estimator {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub sigma2_hat: f64,
    pub method: NoiseMethod,
    pub t_used: Option<f64>,
}

/// `σ̂² = Σ_{i>r} Z_i² / (n - r)`.
pub fn estimate_sigma_finite_rank(rot: &RotatedSample, eig: &EigenSystem) -> Result<NoiseEstimate> {
    let (n, r) = (eig.n(), eig.rank());
    if rot.n() != n {
        return Err(Error::input("rotated sample does not match the eigensystem"));
    }
    if r >= n {
        return Err(Error::state("Gram matrix has full rank; the tail estimator needs r < n"));
    }
    let tail: f64 = rot.z[r..].iter().map(|z| z * z).sum();
    Ok(NoiseEstimate { sigma2_hat: tail / (n - r) as f64, method: NoiseMethod::FiniteRankTail, t_used: None })
}

/// `σ̂² = R_{1,T} / ((1/n) Σ_{i≤r} μ̂_i (1 - γ_i(T))²)`.
///
/// `horizon` defaults to `10⁴/η`, capped at the filter's `t_max`.
pub fn estimate_sigma_smoothed(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    horizon: Option<f64>,
) -> Result<NoiseEstimate> {
    spec.check(eig)?;
    if rot.n() != eig.n() {
        return Err(Error::input("rotated sample does not match the eigensystem"));
    }
    let t = horizon.unwrap_or((DEFAULT_SMOOTHED_HORIZON / spec.eta).min(spec.t_max));
    if !(t > 0.0) {
        return Err(Error::input(format!("horizon must be positive, got {t}")));
    }
    let numer = smoothed_risk_unchecked(rot, eig, spec, t, 1.0);
    let denom: f64 = eig
        .active()
        .iter()
        .map(|&m| {
            let res = 1.0 - spec.gamma_unchecked(m, t);
            m * res * res
        })
        .sum::<f64>()
        / eig.n() as f64;
    if !(denom > 1e-300) {
        return Err(Error::numeric(format!(
            "smoothed variance denominator underflows at T = {t}; use a shorter horizon"
        )));
    }
    Ok(NoiseEstimate { sigma2_hat: numer / denom, method: NoiseMethod::SmoothedResidual, t_used: Some(t) })
}

/// Picks the tail estimator when the Gram matrix is rank deficient and the
/// smoothed one otherwise.
pub fn estimate_sigma_auto(rot: &RotatedSample, eig: &EigenSystem, spec: &FilterSpec) -> Result<NoiseEstimate> {
    if eig.rank() < eig.n() {
        estimate_sigma_finite_rank(rot, eig)
    } else {
        estimate_sigma_smoothed(rot, eig, spec, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMethod {
    /// `log(μ̂_1/μ̂_2) / log 2`.
    #[default]
    TopTwo,
    /// Least-squares slope of `log μ̂_i` against `log i` for `i ≤ 20`.
    LogLogFit,
}

/// `β̂ = log(μ̂_1/μ̂_2) / log 2`.
pub fn estimate_beta(eig: &EigenSystem) -> Result<f64> {
    estimate_beta_with(eig, BetaMethod::TopTwo)
}

pub fn estimate_beta_with(eig: &EigenSystem, method: BetaMethod) -> Result<f64> {
    let mu = eig.values();
    if mu.len() < 2 || eig.rank() < 2 || !(mu[1] > eig.rank_tol() * mu[0]) {
        return Err(Error::state("spectrum too degenerate to estimate a decay exponent"));
    }
    match method {
        BetaMethod::TopTwo => Ok((mu[0] / mu[1]).ln() / std::f64::consts::LN_2),
        BetaMethod::LogLogFit => {
            let k = eig.rank().min(20);
            let pts: Vec<(f64, f64)> = (0..k).map(|i| (((i + 1) as f64).ln(), mu[i].ln())).collect();
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k as f64;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k as f64;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            Ok(-sxy / sxx)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaChoice {
    pub alpha: f64,
    /// Set when `β̂ ≤ 1` and the fallback value was used.
    pub fallback: bool,
}

/// Smoothing level `1/(β̂ + 1)`, the lower end of `[1/(β+1), 1/β)`.
pub fn default_alpha(beta_hat: f64) -> AlphaChoice {
    if beta_hat > 1.0 && beta_hat.is_finite() {
        AlphaChoice { alpha: (1.0 / (beta_hat + 1.0)).clamp(0.0, 1.0), fallback: false }
    } else {
        log::warn!("decay estimate {beta_hat} is not above 1; using alpha = 0.5");
        AlphaChoice { alpha: 0.5, fallback: true }
    }
}
