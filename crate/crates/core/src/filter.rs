//! Spectral filters: gradient descent and kernel ridge regression written as
//! shrinkage trajectories `γ_i(t)` acting on the rotated responses.
//!
//! Time is continuous for both families. With `λ_t = 1/(η t)`:
//!
//! * gradient descent: `γ_i(t) = 1 - (1 - η μ̂_i)^t`
//! * kernel ridge:     `γ_i(t) = μ̂_i / (μ̂_i + λ_t)`
//!
//! Directions beyond the numerical rank are treated as `μ̂_i = 0`, hence
//! `γ_i ≡ 0` there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{eval_kernel, mu_pow, EigenSystem, KernelKind, RotatedSample};

/// Default horizon in units of `1/η`.
pub const DEFAULT_HORIZON: f64 = 1e6;

/// Gradient-descent step size is `1 / (GD_STEP_FACTOR · μ̂_1)` by default.
pub const GD_STEP_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterFamily {
    #[serde(alias = "gd")]
    GradientDescent,
    #[serde(alias = "krr")]
    KernelRidge,
}

impl std::str::FromStr for FilterFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" | "gradient_descent" => Ok(FilterFamily::GradientDescent),
            "krr" | "kernel_ridge" => Ok(FilterFamily::KernelRidge),
            _ => Err(Error::input(format!("unknown filter family {s:?}"))),
        }
    }
}

/// A concrete filter: family, step size / calibration `η`, and search horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub family: FilterFamily,
    pub eta: f64,
    pub t_max: f64,
}

impl FilterSpec {
    pub fn new(family: FilterFamily, eta: f64, t_max: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::config(format!("eta must be positive, got {eta}")));
        }
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::config(format!("t_max must be positive, got {t_max}")));
        }
        Ok(Self { family, eta, t_max })
    }

    /// Default `η` for the family (`1/(1.2 μ̂_1)` for GD, `1` for KRR) and
    /// horizon `10⁶/η`.
    pub fn for_eigensystem(family: FilterFamily, eig: &EigenSystem) -> Result<Self> {
        FilterPolicy::new(family).resolve(eig)
    }

    /// Earliest time considered by continuous-time stopping rules.
    pub fn t_min(&self) -> f64 {
        1e-6 / self.eta
    }

    /// Checks the step-size condition `η μ̂_1 < 1` for gradient descent.
    pub fn check(&self, eig: &EigenSystem) -> Result<()> {
        if self.family == FilterFamily::GradientDescent && self.eta * eig.top() >= 1.0 {
            return Err(Error::config(format!(
                "gradient descent needs eta * mu_1 < 1, got {} * {}",
                self.eta,
                eig.top()
            )));
        }
        Ok(())
    }

    /// `γ(t)` for a single eigenvalue, assuming the step-size condition holds.
    #[inline]
    pub(crate) fn gamma_unchecked(&self, mu: f64, t: f64) -> f64 {
        if mu <= 0.0 || t <= 0.0 {
            return 0.0;
        }
        match self.family {
            FilterFamily::GradientDescent => -(t * (-self.eta * mu).ln_1p()).exp_m1(),
            FilterFamily::KernelRidge => {
                let s = self.eta * t * mu;
                s / (1.0 + s)
            }
        }
    }

    /// `γ_i(t)` for every direction up to the rank.
    pub fn shrinkage(&self, eig: &EigenSystem, t: f64) -> Vec<f64> {
        eig.active().iter().map(|&m| self.gamma_unchecked(m, t)).collect()
    }
}

/// Step-size choice that is resolved against a concrete eigensystem.
///
/// Serialized as the string `"auto"` or a number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AutoOr", into = "AutoOr")]
pub enum EtaChoice {
    Auto,
    Fixed(f64),
}

/// Wire form of settings that are either `"auto"` or a number.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum AutoOr {
    Num(f64),
    Text(String),
}

impl AutoOr {
    pub(crate) fn parse(self, what: &str) -> Result<Option<f64>> {
        match self {
            AutoOr::Num(v) => Ok(Some(v)),
            AutoOr::Text(s) if s.trim().eq_ignore_ascii_case("auto") => Ok(None),
            AutoOr::Text(s) => s
                .trim()
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::config(format!("{what} must be \"auto\" or a number, got {s:?}"))),
        }
    }
}

impl TryFrom<AutoOr> for EtaChoice {
    type Error = Error;
    fn try_from(v: AutoOr) -> Result<Self> {
        Ok(v.parse("eta")?.map_or(EtaChoice::Auto, EtaChoice::Fixed))
    }
}

impl From<EtaChoice> for AutoOr {
    fn from(v: EtaChoice) -> Self {
        match v {
            EtaChoice::Auto => AutoOr::Text("auto".into()),
            EtaChoice::Fixed(x) => AutoOr::Num(x),
        }
    }
}

/// Filter configuration that is independent of the data: used by the
/// simulation harness and by split-based rules, which refit on sub-samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterPolicy {
    pub family: FilterFamily,
    #[serde(default = "auto_eta")]
    pub eta: EtaChoice,
    /// Horizon; `None` means `10⁶/η`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

fn auto_eta() -> EtaChoice {
    EtaChoice::Auto
}

impl FilterPolicy {
    pub fn new(family: FilterFamily) -> Self {
        Self { family, eta: EtaChoice::Auto, t_max: None }
    }

    pub fn resolve(&self, eig: &EigenSystem) -> Result<FilterSpec> {
        let eta = match (self.eta, self.family) {
            (EtaChoice::Fixed(v), _) => v,
            (EtaChoice::Auto, FilterFamily::GradientDescent) => {
                if !(eig.top() > 0.0) {
                    return Err(Error::numeric("cannot pick a step size for a zero Gram matrix"));
                }
                1.0 / (GD_STEP_FACTOR * eig.top())
            }
            (EtaChoice::Auto, FilterFamily::KernelRidge) => 1.0,
        };
        let t_max = self.t_max.unwrap_or(DEFAULT_HORIZON / eta);
        let spec = FilterSpec::new(self.family, eta, t_max)?;
        spec.check(eig)?;
        Ok(spec)
    }
}

/// Shrinkage factor `γ(t)` for one eigenvalue.
pub fn shrinkage_gamma(spec: &FilterSpec, mu_hat: f64, t: f64) -> Result<f64> {
    if !(mu_hat >= 0.0) || !mu_hat.is_finite() {
        return Err(Error::input(format!("eigenvalue must be >= 0, got {mu_hat}")));
    }
    if !(t >= 0.0) {
        return Err(Error::input(format!("time must be >= 0, got {t}")));
    }
    if spec.family == FilterFamily::GradientDescent && spec.eta * mu_hat >= 1.0 {
        return Err(Error::config(format!("gradient descent needs eta * mu < 1, got {}", spec.eta * mu_hat)));
    }
    Ok(spec.gamma_unchecked(mu_hat, t))
}

/// Estimator at one time: eigen-coordinates, fitted values, and the dual
/// coefficients `c` with `F_t = K_n c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub t: f64,
    pub coords: Vec<f64>,
    pub fitted: Vec<f64>,
    pub dual: Vec<f64>,
}

impl Fit {
    /// Off-sample evaluation `f_t(x) = (1/n) Σ_j c_j K(x, x_j)`.
    pub fn predict(&self, kind: KernelKind, xs_train: &[f64], x: f64) -> Result<f64> {
        if xs_train.len() != self.dual.len() {
            return Err(Error::input("training covariates do not match the fit"));
        }
        let mut acc = 0.0;
        for (c, &xj) in self.dual.iter().zip(xs_train) {
            acc += c * eval_kernel(kind, x, xj)?;
        }
        Ok(acc / xs_train.len() as f64)
    }
}

fn check_time(spec: &FilterSpec, t: f64) -> Result<()> {
    if !(t >= 0.0) || t > spec.t_max {
        return Err(Error::input(format!("time {t} outside [0, {}]", spec.t_max)));
    }
    Ok(())
}

fn check_lengths(eig: &EigenSystem, rot: &RotatedSample) -> Result<()> {
    if rot.n() != eig.n() {
        return Err(Error::input(format!(
            "rotated sample has {} coordinates, eigensystem has n = {}",
            rot.n(),
            eig.n()
        )));
    }
    Ok(())
}

/// Filter estimate at time `t`.
pub fn fit_at_time(spec: &FilterSpec, eig: &EigenSystem, rot: &RotatedSample, t: f64) -> Result<Fit> {
    spec.check(eig)?;
    check_time(spec, t)?;
    check_lengths(eig, rot)?;
    let n = eig.n();
    let mut coords = vec![0.0; n];
    let mut filt = vec![0.0; n];
    for (i, &mu) in eig.active().iter().enumerate() {
        let g = spec.gamma_unchecked(mu, t);
        coords[i] = g * rot.z[i];
        // g_t(μ) = γ/μ; zero directions contribute nothing.
        filt[i] = g / mu * rot.z[i];
    }
    let fitted = eig.unproject(&coords)?;
    let dual = eig.unproject(&filt)?;
    Ok(Fit { t, coords, fitted, dual })
}

/// Prediction of the time-`t` estimator at a new covariate.
#[allow(clippy::too_many_arguments)]
pub fn predict(
    spec: &FilterSpec,
    eig: &EigenSystem,
    rot: &RotatedSample,
    xs_train: &[f64],
    kind: KernelKind,
    t: f64,
    x_new: f64,
) -> Result<f64> {
    fit_at_time(spec, eig, rot, t)?.predict(kind, xs_train, x_new)
}

/// `R_t = (1/n) Σ_i (1 - γ_i)² Z_i²` over all `n` directions.
pub fn empirical_risk_full(rot: &RotatedSample, eig: &EigenSystem, spec: &FilterSpec, t: f64) -> Result<f64> {
    spec.check(eig)?;
    check_lengths(eig, rot)?;
    let r = eig.rank();
    let head: f64 = eig
        .active()
        .iter()
        .zip(&rot.z)
        .map(|(&m, &z)| {
            let res = 1.0 - spec.gamma_unchecked(m, t);
            res * res * z * z
        })
        .sum();
    let tail: f64 = rot.z[r..].iter().map(|z| z * z).sum();
    Ok((head + tail) / eig.n() as f64)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("smoothing alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn smoothed_risk_unchecked(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    t: f64,
    alpha: f64,
) -> f64 {
    let s: f64 = eig
        .active()
        .iter()
        .zip(&rot.z)
        .map(|(&m, &z)| {
            let res = 1.0 - spec.gamma_unchecked(m, t);
            mu_pow(m, alpha) * res * res * z * z
        })
        .sum();
    s / eig.n() as f64
}

/// `R_{α,t} = (1/n) Σ_{i≤r} μ̂_i^α (1 - γ_i)² Z_i²`; at `α = 0` this is the
/// reduced empirical risk.
pub fn smoothed_reduced_risk(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    t: f64,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    spec.check(eig)?;
    check_lengths(eig, rot)?;
    if !(t >= 0.0) {
        return Err(Error::input(format!("time must be >= 0, got {t}")));
    }
    Ok(smoothed_risk_unchecked(rot, eig, spec, t, alpha))
}

/// Expected empirical risk over all `n` directions:
/// `E R_t = B²(t) + (σ²/n) Σ_i (1 - γ_i)²`.
pub fn expected_empirical_risk(rot: &RotatedSample, eig: &EigenSystem, spec: &FilterSpec, t: f64) -> Result<f64> {
    spec.check(eig)?;
    check_lengths(eig, rot)?;
    let (g, s2) = rot.oracle()?;
    let n = eig.n();
    let r = eig.rank();
    let mut acc = 0.0;
    for (i, (&gi, &mu)) in g.iter().zip(eig.values()).enumerate() {
        let res = if i < r { 1.0 - spec.gamma_unchecked(mu, t) } else { 1.0 };
        acc += res * res * (gi * gi + s2);
    }
    Ok(acc / n as f64)
}

#[inline]
pub(crate) fn expected_smoothed_risk_unchecked(
    g: &[f64],
    s2: f64,
    eig: &EigenSystem,
    spec: &FilterSpec,
    t: f64,
    alpha: f64,
) -> f64 {
    let s: f64 = eig
        .active()
        .iter()
        .zip(g)
        .map(|(&m, &gi)| {
            let res = 1.0 - spec.gamma_unchecked(m, t);
            mu_pow(m, alpha) * res * res * (gi * gi + s2)
        })
        .sum();
    s / eig.n() as f64
}

/// `E R_{α,t} = B²_α(t) + (σ²/n) Σ_{i≤r} μ̂_i^α (1 - γ_i)²`.
pub fn expected_smoothed_risk(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    t: f64,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    spec.check(eig)?;
    check_lengths(eig, rot)?;
    let (g, s2) = rot.oracle()?;
    Ok(expected_smoothed_risk_unchecked(g, s2, eig, spec, t, alpha))
}

/// Bias–variance split of the risk at one time.
///
/// `bias2_alpha` and `variance_alpha` are the `α`-norm versions and sum only
/// over the nonzero spectrum; `bias2` includes the tail `G*_i, i > r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleDecomposition {
    pub t: f64,
    pub bias2: f64,
    pub variance: f64,
    pub bias2_alpha: f64,
    pub variance_alpha: f64,
    /// `v(t) = (1/n) Σ γ_i² ε_i²`, present when the realized noise is known.
    pub stoch_variance: Option<f64>,
    pub risk: f64,
}

/// Exact bias, variance, and risk of the time-`t` estimator.
///
/// `noise` is the realized noise vector in the original coordinates.
pub fn oracle_decomposition(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    t: f64,
    alpha: f64,
    noise: Option<&[f64]>,
) -> Result<OracleDecomposition> {
    check_alpha(alpha)?;
    spec.check(eig)?;
    check_lengths(eig, rot)?;
    let (g, s2) = rot.oracle()?;
    let n = eig.n() as f64;
    let r = eig.rank();
    let mut bias2 = 0.0;
    let mut var = 0.0;
    let mut bias2_a = 0.0;
    let mut var_a = 0.0;
    for (i, &gi) in g.iter().enumerate() {
        let (gam, w) = if i < r {
            let m = eig.values()[i];
            (spec.gamma_unchecked(m, t), mu_pow(m, alpha))
        } else {
            (0.0, 0.0)
        };
        let b = (1.0 - gam) * (1.0 - gam) * gi * gi;
        bias2 += b;
        var += gam * gam;
        bias2_a += w * b;
        var_a += w * gam * gam;
    }
    let stoch_variance = match noise {
        Some(eps) => {
            let rotated = eig.project(eps)?;
            let v: f64 = eig
                .active()
                .iter()
                .zip(&rotated)
                .map(|(&m, &e)| {
                    let gam = spec.gamma_unchecked(m, t);
                    gam * gam * e * e
                })
                .sum();
            Some(v / n)
        }
        None => None,
    };
    let bias2 = bias2 / n;
    let variance = s2 * var / n;
    Ok(OracleDecomposition {
        t,
        bias2,
        variance,
        bias2_alpha: bias2_a / n,
        variance_alpha: s2 * var_a / n,
        stoch_variance,
        risk: bias2 + variance,
    })
}

/// Exact risk `B²(t) + V(t)` without building the full decomposition.
#[inline]
pub(crate) fn risk_unchecked(g: &[f64], s2: f64, eig: &EigenSystem, spec: &FilterSpec, t: f64) -> f64 {
    let r = eig.rank();
    let mut acc = 0.0;
    for (i, &gi) in g.iter().enumerate() {
        if i < r {
            let gam = spec.gamma_unchecked(eig.values()[i], t);
            acc += (1.0 - gam) * (1.0 - gam) * gi * gi + s2 * gam * gam;
        } else {
            acc += gi * gi;
        }
    }
    acc / eig.n() as f64
}

/// Realized loss `‖f^t - f*‖²_n = (1/n) Σ (γ_i Z_i - G*_i)²`.
pub fn squared_error(rot: &RotatedSample, eig: &EigenSystem, spec: &FilterSpec, t: f64) -> Result<f64> {
    spec.check(eig)?;
    check_lengths(eig, rot)?;
    let g = rot.g_star.as_deref().ok_or_else(|| Error::state("oracle coefficients G* are not available"))?;
    Ok(squared_error_unchecked(&rot.z, g, eig, spec, t))
}

#[inline]
pub(crate) fn squared_error_unchecked(z: &[f64], g: &[f64], eig: &EigenSystem, spec: &FilterSpec, t: f64) -> f64 {
    let r = eig.rank();
    let mut acc = 0.0;
    for i in 0..z.len() {
        let fit = if i < r { spec.gamma_unchecked(eig.values()[i], t) * z[i] } else { 0.0 };
        let d = fit - g[i];
        acc += d * d;
    }
    acc / z.len() as f64
}
