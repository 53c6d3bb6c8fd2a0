//! Stopping rules for the filter trajectory.
//!
//! Continuous-time rules (`mdp_stop`, `theoretical_mdp_stop`,
//! `balancing_stop`) bisect in `log t` on `[t_min, t_max]`. Integer rules scan
//! `t = 0, 1, 2, …` and return the first `t` whose successor is strictly worse.

use faer::Mat;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complexity::complexity_unchecked;
use crate::error::{Error, Result};
use crate::filter::{
    expected_smoothed_risk_unchecked, risk_unchecked, smoothed_risk_unchecked, squared_error_unchecked, FilterPolicy,
    FilterSpec,
};
use crate::kernel::{
    build_gram, cross_kernel, eigensystem, mu_pow, DesignSample, EigenSystem, KernelKind, RotatedSample,
    DEFAULT_RANK_TOL,
};

/// Relative tolerance in `t` of the continuous-time bisection.
pub const TIME_TOL: f64 = 1e-6;

/// Number of folds used when none is given.
pub const DEFAULT_FOLDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    Mdp,
    SmoothedMdp,
    TheoreticalMdp,
    Balancing,
    Oracle,
    LocalComplexity,
    HoldOut,
    VFold,
}

impl StoppingRule {
    pub const ALL: [StoppingRule; 8] = [
        StoppingRule::Mdp,
        StoppingRule::SmoothedMdp,
        StoppingRule::TheoreticalMdp,
        StoppingRule::Balancing,
        StoppingRule::Oracle,
        StoppingRule::LocalComplexity,
        StoppingRule::HoldOut,
        StoppingRule::VFold,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StoppingRule::Mdp => "mdp",
            StoppingRule::SmoothedMdp => "smoothed_mdp",
            StoppingRule::TheoreticalMdp => "theoretical_mdp",
            StoppingRule::Balancing => "balancing",
            StoppingRule::Oracle => "oracle",
            StoppingRule::LocalComplexity => "local_complexity",
            StoppingRule::HoldOut => "hold_out",
            StoppingRule::VFold => "v_fold",
        }
    }

    /// Whether the rule needs `G*` and the true noise level.
    pub fn needs_oracle(&self) -> bool {
        matches!(self, StoppingRule::TheoreticalMdp | StoppingRule::Balancing | StoppingRule::Oracle)
    }
}

impl std::fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StoppingRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let rule = match key.as_str() {
            "mdp" => StoppingRule::Mdp,
            "smoothed_mdp" => StoppingRule::SmoothedMdp,
            "theoretical_mdp" => StoppingRule::TheoreticalMdp,
            "balancing" => StoppingRule::Balancing,
            "oracle" => StoppingRule::Oracle,
            "local_complexity" => StoppingRule::LocalComplexity,
            "hold_out" | "holdout" | "ho" => StoppingRule::HoldOut,
            "v_fold" | "vfold" | "vfcv" => StoppingRule::VFold,
            _ => return Err(Error::input(format!("unknown stopping rule {s:?}"))),
        };
        Ok(rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingOutcome {
    pub rule: StoppingRule,
    pub t_stop: f64,
    pub alpha: Option<f64>,
    /// Level the risk was compared against, when the rule has one.
    pub threshold: Option<f64>,
    /// Set when the search ended at either end of its range.
    pub hit_boundary: bool,
    pub seed: Option<u64>,
}

impl StoppingOutcome {
    fn new(rule: StoppingRule, t_stop: f64, hit_boundary: bool) -> Self {
        Self { rule, t_stop, alpha: None, threshold: None, hit_boundary, seed: None }
    }
}

/// Which risk the oracle rule follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// `E‖f^t - f*‖²_n = B²(t) + V(t)`.
    #[default]
    Expected,
    /// `‖f^t - f*‖²_n` on the realized noise.
    Realized,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

fn check_rot(rot: &RotatedSample, eig: &EigenSystem) -> Result<()> {
    if rot.n() != eig.n() {
        return Err(Error::input("rotated sample does not match the eigensystem"));
    }
    Ok(())
}

/// Smallest `t ∈ [t_min, t_max]` with `done(t)`, for a predicate that flips
/// from false to true at most once.
fn first_crossing(spec: &FilterSpec, mut done: impl FnMut(f64) -> bool) -> (f64, bool) {
    let mut lo = spec.t_min();
    let mut hi = spec.t_max;
    if done(lo) {
        return (lo, true);
    }
    if !done(hi) {
        return (hi, true);
    }
    while hi / lo - 1.0 > TIME_TOL {
        let mid = (lo * hi).sqrt();
        if done(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, false)
}

/// First `t ≥ 0` with `risk(t + 1) > risk(t)`. Returns `(cap, true)` when no
/// increase happens before `cap`.
fn first_increase(cap: u64, mut risk: impl FnMut(u64) -> f64) -> (u64, bool) {
    let mut prev = risk(0);
    for t in 0..cap {
        let next = risk(t + 1);
        if next > prev {
            return (t, t == 0);
        }
        prev = next;
    }
    (cap, true)
}

fn integer_cap(spec: &FilterSpec) -> u64 {
    spec.t_max.floor().min(u64::MAX as f64 / 2.0) as u64
}

fn integer_outcome(rule: StoppingRule, spec: &FilterSpec, t: u64, boundary: bool) -> StoppingOutcome {
    let t_stop = if boundary && t > 0 { spec.t_max } else { t as f64 };
    StoppingOutcome::new(rule, t_stop, boundary)
}

/// `κ_α = σ² Σ_{i≤r} μ̂_i^α / n`.
pub fn mdp_threshold(eig: &EigenSystem, alpha: f64, sigma2: f64) -> f64 {
    sigma2 * eig.trace_power(alpha) / eig.n() as f64
}

/// Data-driven discrepancy rule: first `t` with `R_{α,t} ≤ κ_α`.
///
/// `α = 0` is the plain rule on the reduced empirical risk.
pub fn mdp_stop(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    alpha: f64,
    sigma2: f64,
) -> Result<StoppingOutcome> {
    check_alpha(alpha)?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::input(format!("noise variance must be positive, got {sigma2}")));
    }
    spec.check(eig)?;
    check_rot(rot, eig)?;
    let kappa = mdp_threshold(eig, alpha, sigma2);
    let (t, boundary) = first_crossing(spec, |t| smoothed_risk_unchecked(rot, eig, spec, t, alpha) <= kappa);
    let rule = if alpha == 0.0 { StoppingRule::Mdp } else { StoppingRule::SmoothedMdp };
    Ok(StoppingOutcome { alpha: Some(alpha), threshold: Some(kappa), ..StoppingOutcome::new(rule, t, boundary) })
}

/// Population version of [`mdp_stop`]: first `t` with `E R_{α,t} ≤ κ_α`.
pub fn theoretical_mdp_stop(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    alpha: f64,
) -> Result<StoppingOutcome> {
    check_alpha(alpha)?;
    spec.check(eig)?;
    check_rot(rot, eig)?;
    let (g, s2) = rot.oracle()?;
    let kappa = mdp_threshold(eig, alpha, s2);
    let (t, boundary) = first_crossing(spec, |t| expected_smoothed_risk_unchecked(g, s2, eig, spec, t, alpha) <= kappa);
    Ok(StoppingOutcome {
        alpha: Some(alpha),
        threshold: Some(kappa),
        ..StoppingOutcome::new(StoppingRule::TheoreticalMdp, t, boundary)
    })
}

/// `(B², V)` used by the balancing rule: the full bias (with the tail beyond
/// the rank) at `α = 0`, the `α`-weighted pair otherwise.
pub(crate) fn balance_terms(
    g: &[f64],
    s2: f64,
    eig: &EigenSystem,
    spec: &FilterSpec,
    t: f64,
    alpha: f64,
) -> (f64, f64) {
    let r = eig.rank();
    let mut b = 0.0;
    let mut v = 0.0;
    for (i, &m) in eig.active().iter().enumerate() {
        let gam = spec.gamma_unchecked(m, t);
        let w = mu_pow(m, alpha);
        b += w * (1.0 - gam) * (1.0 - gam) * g[i] * g[i];
        v += w * gam * gam;
    }
    if alpha == 0.0 {
        b += g[r..].iter().map(|x| x * x).sum::<f64>();
    }
    let n = eig.n() as f64;
    (b / n, s2 * v / n)
}

/// First `t` with `B²_α(t) ≤ V_α(t)`.
pub fn balancing_stop(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    alpha: f64,
) -> Result<StoppingOutcome> {
    check_alpha(alpha)?;
    spec.check(eig)?;
    check_rot(rot, eig)?;
    let (g, s2) = rot.oracle()?;
    let (t, boundary) = first_crossing(spec, |t| {
        let (b, v) = balance_terms(g, s2, eig, spec, t, alpha);
        b <= v
    });
    Ok(StoppingOutcome { alpha: Some(alpha), ..StoppingOutcome::new(StoppingRule::Balancing, t, boundary) })
}

/// First integer `t` after which the risk increases.
pub fn oracle_stop(
    rot: &RotatedSample,
    eig: &EigenSystem,
    spec: &FilterSpec,
    mode: OracleMode,
) -> Result<StoppingOutcome> {
    spec.check(eig)?;
    check_rot(rot, eig)?;
    let (g, s2) = rot.oracle()?;
    let cap = integer_cap(spec);
    let (t, boundary) = match mode {
        OracleMode::Expected => first_increase(cap, |t| risk_unchecked(g, s2, eig, spec, t as f64)),
        OracleMode::Realized => first_increase(cap, |t| squared_error_unchecked(&rot.z, g, eig, spec, t as f64)),
    };
    Ok(integer_outcome(StoppingRule::Oracle, spec, t, boundary))
}

/// Complexity rule: with `C(t)` the statement
/// `R̂_n(1/sqrt(η t)) > 1/(2 e σ η t)`, returns `min{t ≥ 1 : C(t)} - 1`.
///
/// `t·R̂_n(1/sqrt(η t))` is nondecreasing, so `C` flips once and is located
/// by doubling followed by integer bisection.
pub fn local_complexity_stop(eig: &EigenSystem, spec: &FilterSpec, sigma: f64, radius: f64) -> Result<StoppingOutcome> {
    if !(sigma > 0.0) || !(radius > 0.0) {
        return Err(Error::input("sigma and radius must be positive"));
    }
    spec.check(eig)?;
    let eta = spec.eta;
    let cond = |t: u64| {
        let t = t as f64;
        complexity_unchecked(eig, 1.0 / (eta * t).sqrt(), 0.0, radius)
            > 1.0 / (2.0 * std::f64::consts::E * sigma * eta * t)
    };
    let cap = integer_cap(spec).max(1);
    let finish = |t: u64, boundary: bool| {
        Ok(StoppingOutcome {
            threshold: Some(1.0 / (2.0 * std::f64::consts::E * sigma * eta * (t + 1) as f64)),
            ..integer_outcome(StoppingRule::LocalComplexity, spec, t, boundary)
        })
    };
    if cond(1) {
        return finish(0, true);
    }
    // cond(lo) is false, cond(hi) true.
    let mut lo = 1u64;
    let mut hi = 2u64;
    loop {
        if hi > cap {
            if !cond(cap) {
                return finish(cap, true);
            }
            hi = cap;
            break;
        }
        if cond(hi) {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if cond(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    finish(hi - 1, false)
}

/// Filter trajectory on a training sample, evaluated on a test sample.
struct SplitPath {
    spec: FilterSpec,
    mu: Vec<f64>,
    z: Vec<f64>,
    /// `K(test, train) U_r / n_train`, column-major.
    design: Mat<f64>,
    y_test: Vec<f64>,
}

impl SplitPath {
    fn new(
        sample: &DesignSample,
        kind: KernelKind,
        policy: &FilterPolicy,
        train: &[usize],
        test: &[usize],
    ) -> Result<Self> {
        let tr = sample.subset(train)?;
        let te = sample.subset(test)?;
        let eig = eigensystem(&build_gram(kind, tr.xs())?, DEFAULT_RANK_TOL)?;
        let spec = policy.resolve(&eig)?;
        let r = eig.rank();
        let z = eig.project(tr.ys())?[..r].to_vec();
        let cross = cross_kernel(kind, te.xs(), tr.xs())?;
        let design = (cross.as_ref() * eig.vectors().as_ref().subcols(0, r)) * faer::Scale(1.0 / tr.len() as f64);
        Ok(Self { spec, mu: eig.active().to_vec(), z, design, y_test: te.ys().to_vec() })
    }

    /// `Σ_{test} (f_t(x_i) - y_i)²`.
    fn test_loss(&self, t: f64) -> f64 {
        let m = self.y_test.len();
        let mut pred = vec![0.0; m];
        for (k, (&mu, &z)) in self.mu.iter().zip(&self.z).enumerate() {
            let c = self.spec.gamma_unchecked(mu, t) / mu * z;
            if c == 0.0 {
                continue;
            }
            let col = self.design.col(k);
            for i in 0..m {
                pred[i] += col[i] * c;
            }
        }
        pred.iter().zip(&self.y_test).map(|(p, y)| (p - y) * (p - y)).sum()
    }
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Seeded half/half split `(train, test)`; the training half has `n/2` points.
pub fn holdout_split(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let idx = shuffled(n, seed);
    let (a, b) = idx.split_at(n / 2);
    (a.to_vec(), b.to_vec())
}

/// Seeded partition of `0..n` into `folds` near-equal test blocks.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let idx = shuffled(n, seed);
    fold_blocks(n, folds).into_iter().map(|b| idx[b].to_vec()).collect()
}

/// Hold-out rule: train on a random half, stop when the test error on the
/// other half first increases.
pub fn holdout_stop(
    sample: &DesignSample,
    kind: KernelKind,
    policy: &FilterPolicy,
    seed: u64,
) -> Result<StoppingOutcome> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::input(format!("hold-out needs n >= 4, got {n}")));
    }
    let (train, test) = holdout_split(n, seed);
    let path = SplitPath::new(sample, kind, policy, &train, &test)?;
    let m = test.len() as f64;
    let (t, boundary) = first_increase(integer_cap(&path.spec), |t| path.test_loss(t as f64) / m);
    Ok(StoppingOutcome { seed: Some(seed), ..integer_outcome(StoppingRule::HoldOut, &path.spec, t, boundary) })
}

/// Boundaries of `V` consecutive, near-equal blocks of a shuffled index set.
fn fold_blocks(n: usize, folds: usize) -> Vec<std::ops::Range<usize>> {
    (0..folds).map(|j| j * n / folds..(j + 1) * n / folds).collect()
}

/// `V`-fold cross-validation rule on the criterion
/// `(1/(V-1)) Σ_j (V/n) Σ_{i ∈ block j} (f^{(-j)}_t(x_i) - y_i)²`.
pub fn vfold_stop(
    sample: &DesignSample,
    kind: KernelKind,
    policy: &FilterPolicy,
    folds: usize,
    seed: u64,
) -> Result<StoppingOutcome> {
    let n = sample.len();
    if folds < 2 {
        return Err(Error::input(format!("need at least two folds, got {folds}")));
    }
    if n < 2 * folds {
        return Err(Error::input(format!("{folds}-fold cross-validation needs n >= {}, got {n}", 2 * folds)));
    }
    let blocks = fold_partition(n, folds, seed);
    let mut paths = Vec::with_capacity(folds);
    for (j, test) in blocks.iter().enumerate() {
        let train: Vec<usize> =
            blocks.iter().enumerate().filter(|&(k, _)| k != j).flat_map(|(_, b)| b.iter().copied()).collect();
        paths.push(SplitPath::new(sample, kind, policy, &train, test)?);
    }
    let scale = folds as f64 / ((folds - 1) as f64 * n as f64);
    let cap = paths.iter().map(|p| integer_cap(&p.spec)).min().unwrap_or(0);
    let (t, boundary) = first_increase(cap, |t| scale * paths.iter().map(|p| p.test_loss(t as f64)).sum::<f64>());
    let t_stop = if boundary && t > 0 { cap as f64 } else { t as f64 };
    Ok(StoppingOutcome { seed: Some(seed), ..StoppingOutcome::new(StoppingRule::VFold, t_stop, boundary) })
}
