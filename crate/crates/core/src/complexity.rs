//! Localized empirical kernel complexity and its critical radius.
//!
//! The (α-smoothed) complexity at scale `ε` is
//! `R̂_{n,α}(ε) = R sqrt((1/n) Σ_{i≤r} μ̂_i^α min{μ̂_i, ε²})`, and the critical
//! radius is the smallest `ε > 0` with `σ R̂_{n,α}(ε)/(ε R) ≤ c R ε^{1+α}`
//! (`c = 2` by default).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::estimate_beta;
use crate::kernel::{mu_pow, EigenSystem};

pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_FIXED_POINT_CONST: f64 = 2.0;

/// Smallest ε tried by the solver.
const LOWER_BRACKET: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

/// Kernel complexity `R̂_{n,α}(ε)`.
pub fn kernel_complexity(eig: &EigenSystem, epsilon: f64, alpha: f64, radius: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::input(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(radius > 0.0) {
        return Err(Error::input(format!("radius must be positive, got {radius}")));
    }
    check_alpha(alpha)?;
    Ok(complexity_unchecked(eig, epsilon, alpha, radius))
}

#[inline]
pub(crate) fn complexity_unchecked(eig: &EigenSystem, epsilon: f64, alpha: f64, radius: f64) -> f64 {
    let e2 = epsilon * epsilon;
    let s: f64 = eig.active().iter().map(|&m| mu_pow(m, alpha) * m.min(e2)).sum();
    radius * (s / eig.n() as f64).sqrt()
}

/// Solution of the (smoothed) critical inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRadiusResult {
    pub alpha: f64,
    pub epsilon_hat: f64,
    /// `σ R̂(ε̂)/(ε̂ R) - c R ε̂^{1+α}` at the returned radius.
    pub residual: f64,
    pub d_stat: usize,
    pub iterations: usize,
}

/// Bisection solver for the critical radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRadiusSolver {
    /// Relative tolerance on ε.
    pub tol: f64,
    pub max_iter: usize,
    /// Constant on the right-hand side of the fixed-point inequality.
    pub fixed_point_const: f64,
}

impl Default for CriticalRadiusSolver {
    fn default() -> Self {
        Self { tol: DEFAULT_SOLVER_TOL, max_iter: DEFAULT_MAX_ITER, fixed_point_const: DEFAULT_FIXED_POINT_CONST }
    }
}

impl CriticalRadiusSolver {
    /// Fixed-point defect `h(ε)`; nonincreasing minus strictly increasing,
    /// so it changes sign exactly once.
    pub fn defect(&self, eig: &EigenSystem, epsilon: f64, alpha: f64, radius: f64, sigma: f64) -> f64 {
        sigma * complexity_unchecked(eig, epsilon, alpha, radius) / (epsilon * radius)
            - self.fixed_point_const * radius * epsilon.powf(1.0 + alpha)
    }

    /// Upper end of the search bracket, `max(1, sqrt(μ̂_1))`.
    pub fn upper_bracket(eig: &EigenSystem) -> f64 {
        eig.top().sqrt().max(1.0)
    }

    pub fn solve(&self, eig: &EigenSystem, alpha: f64, radius: f64, sigma: f64) -> Result<CriticalRadiusResult> {
        check_alpha(alpha)?;
        if !(radius > 0.0) || !(sigma > 0.0) {
            return Err(Error::input("radius and sigma must be positive"));
        }
        if eig.rank() == 0 {
            return Err(Error::Solver("Gram matrix has no nonzero eigenvalue".into()));
        }
        eig.warn_if_unbounded();
        let h = |e: f64| self.defect(eig, e, alpha, radius, sigma);
        let mut lo = LOWER_BRACKET;
        let mut hi = Self::upper_bracket(eig);
        if h(lo) <= 0.0 || h(hi) > 0.0 {
            return Err(Error::Solver(format!("critical inequality has no sign change on ({lo:e}, {hi}]")));
        }
        let mut iterations = 0;
        while iterations < self.max_iter && hi / lo - 1.0 > self.tol {
            // Geometric midpoint: the bracket spans many decades.
            let mid = (lo * hi).sqrt();
            if h(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            iterations += 1;
        }
        let epsilon_hat = hi;
        Ok(CriticalRadiusResult {
            alpha,
            epsilon_hat,
            residual: h(epsilon_hat),
            d_stat: statistical_dimension(eig, epsilon_hat)?,
            iterations,
        })
    }
}

/// Smallest `ε > 0` solving the critical inequality with the default solver.
pub fn critical_radius(
    eig: &EigenSystem,
    alpha: f64,
    radius: f64,
    sigma: f64,
    tol: f64,
) -> Result<CriticalRadiusResult> {
    CriticalRadiusSolver { tol, ..Default::default() }.solve(eig, alpha, radius, sigma)
}

/// `d = min{j ∈ [r] : μ̂_j ≤ ε̂²}` (1-based), or `r` if no such index exists.
pub fn statistical_dimension(eig: &EigenSystem, epsilon_hat: f64) -> Result<usize> {
    if !(epsilon_hat > 0.0) {
        return Err(Error::input(format!("critical radius must be positive, got {epsilon_hat}")));
    }
    let e2 = epsilon_hat * epsilon_hat;
    Ok(eig.active().iter().position(|&m| m <= e2).map_or(eig.rank(), |j| j + 1))
}

/// Empirical constants of the tail-sum conditions at the critical radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionAudit {
    pub alpha: f64,
    /// `Σ_{i>d} μ̂_i / (d ε̂²)`.
    pub a_const: f64,
    /// `Σ_{i>d} μ̂_i^{2α} / Σ_{i≤d} μ̂_i^{2α}`.
    pub m_const: f64,
    /// Decay exponent estimate; `None` when the spectrum is too degenerate.
    pub beta_hat: Option<f64>,
    pub epsilon_hat: f64,
    pub d_stat: usize,
}

pub fn assumption_audit(eig: &EigenSystem, alpha: f64, radius: f64, sigma: f64) -> Result<AssumptionAudit> {
    let crit = CriticalRadiusSolver::default().solve(eig, alpha, radius, sigma)?;
    Ok(audit_at(eig, &crit))
}

/// Audit for an already-solved critical radius.
pub fn audit_at(eig: &EigenSystem, crit: &CriticalRadiusResult) -> AssumptionAudit {
    let d = crit.d_stat;
    let mu = eig.active();
    let e2 = crit.epsilon_hat * crit.epsilon_hat;
    let tail: f64 = mu[d..].iter().sum();
    let a_const = if d == mu.len() { 0.0 } else { tail / (d as f64 * e2) };
    let tail2: f64 = mu[d..].iter().map(|&m| mu_pow(m, 2.0 * crit.alpha)).sum();
    let head2: f64 = mu[..d].iter().map(|&m| mu_pow(m, 2.0 * crit.alpha)).sum();
    let m_const = if d == mu.len() { 0.0 } else { tail2 / head2 };
    AssumptionAudit {
        alpha: crit.alpha,
        a_const,
        m_const,
        beta_hat: estimate_beta(eig).ok(),
        epsilon_hat: crit.epsilon_hat,
        d_stat: d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    fn spectrum(values: Vec<f64>) -> EigenSystem {
        EigenSystem::diagonal(values).unwrap()
    }

    /// Eigensystem with a prescribed spectrum but `n` larger than its length.
    fn padded(values: &[f64], n: usize) -> EigenSystem {
        let mut v = values.to_vec();
        v.resize(n, 0.0);
        EigenSystem::from_parts(v, Mat::identity(n, n), 1e-10).unwrap()
    }

    #[test]
    fn hand_values() {
        let eig = spectrum(vec![1.0, 0.04]);
        let v = kernel_complexity(&eig, 0.2, 0.0, 1.0).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
        let flat = spectrum(vec![1.0; 5]);
        for e in [0.1, 0.5, 2.0] {
            assert_eq!(kernel_complexity(&flat, e, 0.0, 1.0).unwrap(), kernel_complexity(&flat, e, 1.0, 1.0).unwrap());
        }
        assert!(kernel_complexity(&eig, 0.0, 0.0, 1.0).is_err());
        assert!(kernel_complexity(&eig, 0.1, 1.2, 1.0).is_err());
    }

    #[test]
    fn radius_scaling_is_exact() {
        let eig = spectrum((1..=30).map(|i| 1.0 / (i * i) as f64).collect());
        for e in [0.01, 0.1, 0.7] {
            let a = kernel_complexity(&eig, e, 0.4, 1.0).unwrap();
            let b = kernel_complexity(&eig, e, 0.4, 2.0).unwrap();
            assert_eq!(b, 2.0 * a);
        }
    }

    #[test]
    fn unit_spectrum_radius() {
        let eig = spectrum(vec![1.0]);
        let res = critical_radius(&eig, 0.0, 1.0, 2.0, 1e-10).unwrap();
        assert!((res.epsilon_hat - 1.0).abs() < 1e-9);
        assert_eq!(res.d_stat, 1);
        // Grid oracle: first grid point satisfying the inequality.
        let solver = CriticalRadiusSolver::default();
        let first =
            (1..=10_000).map(|k| k as f64 * 2e-4).find(|&e| solver.defect(&eig, e, 0.0, 1.0, 2.0) <= 0.0).unwrap();
        assert!((first - 1.0).abs() <= 2e-4);
    }

    #[test]
    fn statistical_dimension_scan() {
        let eig = spectrum(vec![1.0, 0.1, 0.01]);
        assert_eq!(statistical_dimension(&eig, 0.05f64.sqrt()).unwrap(), 3);
        assert_eq!(statistical_dimension(&eig, 0.001).unwrap(), 3);
        assert_eq!(statistical_dimension(&eig, 0.5).unwrap(), 2);
        assert_eq!(statistical_dimension(&eig, 2.0).unwrap(), 1);
        assert!(statistical_dimension(&eig, 0.0).is_err());
    }

    #[test]
    fn empty_tail_audit() {
        // Large noise pushes ε̂ below every eigenvalue: d = r.
        let eig = spectrum(vec![0.5, 0.4]);
        let audit = assumption_audit(&eig, 0.3, 1.0, 1e-6).unwrap();
        assert_eq!(audit.d_stat, 2);
        assert_eq!(audit.a_const, 0.0);
        assert_eq!(audit.m_const, 0.0);
    }

    #[test]
    fn inverse_square_spectrum_audit() {
        let n = 2000;
        let mu: Vec<f64> = (1..=n).map(|i| 0.5 / (i * i) as f64).collect();
        let eig = padded(&mu, n);
        for sigma in [0.05, 0.15, 0.5] {
            let audit = assumption_audit(&eig, 0.0, 1.0, sigma).unwrap();
            // Tail-sum integral bound with β = 2, c = C.
            assert!(audit.a_const <= 2.0, "A = {}", audit.a_const);
            assert!(audit.m_const >= 0.0);
            assert!((audit.beta_hat.unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fails_without_spectrum() {
        let eig = spectrum(vec![0.0, 0.0]);
        assert!(matches!(critical_radius(&eig, 0.0, 1.0, 0.1, 1e-10), Err(Error::Solver(_))));
    }

    #[test]
    fn fails_when_noise_swamps_bracket() {
        let eig = spectrum(vec![0.5, 0.1]);
        assert!(matches!(critical_radius(&eig, 0.0, 1.0, 1e6, 1e-10), Err(Error::Solver(_))));
    }
}
