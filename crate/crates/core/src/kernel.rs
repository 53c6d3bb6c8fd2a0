//! Kernels, the normalized Gram matrix, its eigensystem, and rotation of
//! responses into the empirical eigenbasis.
//!
//! All spectral quantities in this crate live in the eigenbasis of
//! `K_n = {K(x_i, x_j) / n}`: a response vector `Y` becomes `Z = Uᵀ Y`,
//! and every filter acts coordinatewise on `Z`.

use std::fmt;
use std::str::FromStr;

use faer::{Col, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold (against `μ̂_1`) below which an eigenvalue counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Negative eigenvalues smaller in magnitude than this (relative to `μ̂_1`)
/// are silently clamped; larger ones are clamped with a warning.
const NEGATIVE_WARN_TOL: f64 = 1e-8;

/// Scalar reproducing kernels on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// First-order Sobolev kernel `min(x, y)` on `[0, 1]`.
    SobolevMin,
    /// `(1 + x y)^degree`, rank at most `degree + 1`.
    Polynomial { degree: u32 },
    /// `exp(-(x - y)² / (2 h²))`.
    Gaussian { bandwidth: f64 },
    /// `exp(-|x - y| / h)`.
    Laplace { bandwidth: f64 },
}

impl KernelKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::SobolevMin => Ok(()),
            KernelKind::Polynomial { degree } if degree >= 1 => Ok(()),
            KernelKind::Polynomial { .. } => Err(Error::config("polynomial degree must be >= 1")),
            KernelKind::Gaussian { bandwidth } | KernelKind::Laplace { bandwidth } => {
                if bandwidth > 0.0 && bandwidth.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config(format!("bandwidth must be positive, got {bandwidth}")))
                }
            }
        }
    }

    /// Rank bound of the Gram matrix, when the kernel has finite rank.
    pub fn finite_rank(&self) -> Option<usize> {
        match *self {
            KernelKind::Polynomial { degree } => Some(degree as usize + 1),
            _ => None,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::SobolevMin => write!(f, "sobolev"),
            KernelKind::Polynomial { degree } => write!(f, "poly:{degree}"),
            KernelKind::Gaussian { bandwidth } => write!(f, "gaussian:{bandwidth}"),
            KernelKind::Laplace { bandwidth } => write!(f, "laplace:{bandwidth}"),
        }
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    /// Parses `sobolev`, `poly:<d>`, `gaussian:<h>` or `laplace:<h>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let kind = match (name, arg) {
            ("sobolev" | "sobolev_min" | "min", None) => KernelKind::SobolevMin,
            ("poly" | "polynomial", Some(a)) => {
                KernelKind::Polynomial { degree: a.parse().map_err(|_| Error::input(format!("bad degree {a:?}")))? }
            }
            ("gaussian" | "rbf", Some(a)) => {
                KernelKind::Gaussian { bandwidth: a.parse().map_err(|_| Error::input(format!("bad bandwidth {a:?}")))? }
            }
            ("laplace", Some(a)) => {
                KernelKind::Laplace { bandwidth: a.parse().map_err(|_| Error::input(format!("bad bandwidth {a:?}")))? }
            }
            _ => return Err(Error::input(format!("unknown kernel {s:?}"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Evaluates `K(x, y)`.
pub fn eval_kernel(kind: KernelKind, x: f64, y: f64) -> Result<f64> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::input("kernel arguments must be finite"));
    }
    Ok(match kind {
        KernelKind::SobolevMin => {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::input(format!("sobolev kernel is defined on [0, 1], got ({x}, {y})")));
            }
            x.min(y)
        }
        KernelKind::Polynomial { degree } => (1.0 + x * y).powi(degree as i32),
        KernelKind::Gaussian { bandwidth } => {
            let d = x - y;
            (-(d * d) / (2.0 * bandwidth * bandwidth)).exp()
        }
        KernelKind::Laplace { bandwidth } => (-(x - y).abs() / bandwidth).exp(),
    })
}

/// Covariates and responses of a one-dimensional regression sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl DesignSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::input(format!(
                "covariates ({}) and responses ({}) differ in length",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::input("a sample needs at least two points"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::input("sample contains non-finite values"));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Sub-sample at the given indices, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        Self::new(idx.iter().map(|&i| self.xs[i]).collect(), idx.iter().map(|&i| self.ys[i]).collect())
    }
}

/// Builds `K_n` with entries `K(x_i, x_j) / n`.
pub fn build_gram(kind: KernelKind, xs: &[f64]) -> Result<Mat<f64>> {
    kind.validate()?;
    let n = xs.len();
    if n < 2 {
        return Err(Error::input("Gram matrix needs n >= 2"));
    }
    let inv_n = 1.0 / n as f64;
    let mut gram = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = eval_kernel(kind, xs[i], xs[j])? * inv_n;
            if !v.is_finite() {
                return Err(Error::numeric(format!("kernel value at ({i}, {j}) is not finite")));
            }
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    Ok(gram)
}

/// Cross-kernel matrix `{K(a_i, b_j)}` (not normalized).
pub fn cross_kernel(kind: KernelKind, a: &[f64], b: &[f64]) -> Result<Mat<f64>> {
    let mut m = Mat::<f64>::zeros(a.len(), b.len());
    for j in 0..b.len() {
        for i in 0..a.len() {
            m[(i, j)] = eval_kernel(kind, a[i], b[j])?;
        }
    }
    Ok(m)
}

/// Eigendecomposition of `K_n` sorted by decreasing eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: Mat<f64>,
    rank: usize,
    rank_tol: f64,
}

impl EigenSystem {
    /// Assembles an eigensystem from already-sorted parts.
    ///
    /// `values` must be nonincreasing; columns of `vectors` are the matching
    /// eigenvectors. Negative values are clamped to zero.
    pub fn from_parts(values: Vec<f64>, vectors: Mat<f64>, rank_tol: f64) -> Result<Self> {
        let n = values.len();
        if n == 0 || vectors.nrows() != n || vectors.ncols() != n {
            return Err(Error::input("eigenvalue count must match a square eigenvector matrix"));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::input("eigenvalues must be sorted nonincreasing"));
        }
        if !(rank_tol >= 0.0) {
            return Err(Error::input("rank tolerance must be nonnegative"));
        }
        let top = values[0].max(0.0);
        if values.iter().any(|&v| v < -NEGATIVE_WARN_TOL * top) {
            log::warn!("Gram matrix has eigenvalues below -{NEGATIVE_WARN_TOL:e} * mu_1; clamping to 0");
        }
        let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
        let cut = rank_tol * top;
        let rank = values.iter().take_while(|&&v| v > cut).count();
        Ok(Self { values, vectors, rank, rank_tol })
    }

    /// Eigensystem of a diagonal matrix, with the identity as eigenbasis.
    pub fn diagonal(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::from_parts(values, Mat::identity(n, n), DEFAULT_RANK_TOL)
    }

    /// Spectrum without eigenvectors; enough for complexity and decay
    /// estimates, but [`project`](Self::project) fails on it.
    pub fn spectrum_only(mut values: Vec<f64>, rank_tol: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("spectrum must be nonempty"));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let mut eig = Self::from_parts(vec![values[0]], Mat::identity(1, 1), rank_tol)?;
        let top = values[0].max(0.0);
        eig.values = values.into_iter().map(|v| v.max(0.0)).collect();
        eig.rank = eig.values.iter().take_while(|&&v| v > rank_tol * top).count();
        eig.vectors = Mat::zeros(0, 0);
        Ok(eig)
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.nrows() == self.n()
    }

    fn require_vectors(&self) -> Result<()> {
        if !self.has_vectors() {
            return Err(Error::state("eigensystem was built without eigenvectors"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// All eigenvalues `μ̂_1 ≥ … ≥ μ̂_n ≥ 0`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `r` eigenvalues above the rank threshold.
    pub fn active(&self) -> &[f64] {
        &self.values[..self.rank]
    }

    pub fn top(&self) -> f64 {
        self.values[0]
    }

    pub fn vectors(&self) -> &Mat<f64> {
        &self.vectors
    }

    /// `tr(K_n^α)` restricted to the nonzero spectrum.
    pub fn trace_power(&self, alpha: f64) -> f64 {
        self.active().iter().map(|&m| mu_pow(m, alpha)).sum()
    }

    /// Kernel boundedness `sup K(x, x) ≤ 1` forces `μ̂_1 ≤ 1`; complexity
    /// formulas saturate at `μ̂_1`, so larger spectra are flagged.
    pub fn exceeds_unit_bound(&self) -> bool {
        self.top() > 1.0
    }

    pub(crate) fn warn_if_unbounded(&self) {
        if self.exceeds_unit_bound() {
            log::warn!("largest Gram eigenvalue {} exceeds 1; the kernel is not bounded by 1", self.top());
        }
    }

    /// `Uᵀ v`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n() {
            return Err(Error::input(format!("vector length {} does not match n = {}", v.len(), self.n())));
        }
        self.require_vectors()?;
        let col = Col::<f64>::from_fn(v.len(), |i| v[i]);
        let out = self.vectors.transpose() * &col;
        Ok((0..self.n()).map(|i| out[i]).collect())
    }

    /// `U g`.
    pub fn unproject(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.n() {
            return Err(Error::input(format!("coefficient length {} does not match n = {}", g.len(), self.n())));
        }
        self.require_vectors()?;
        let col = Col::<f64>::from_fn(g.len(), |i| g[i]);
        let out = &self.vectors * &col;
        Ok((0..self.n()).map(|i| out[i]).collect())
    }

    pub fn dump(&self) -> EigenDump {
        EigenDump { n: self.n(), rank: self.rank, rank_tol: self.rank_tol, eigenvalues: self.values.clone() }
    }
}

/// `μ^α` with `μ^0 = 1` taken literally so that the `α = 0` path matches the
/// unsmoothed formulas bit for bit.
#[inline]
pub(crate) fn mu_pow(mu: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else if alpha == 1.0 {
        mu
    } else {
        mu.powf(alpha)
    }
}

/// JSON debug view of an eigensystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDump {
    pub n: usize,
    pub rank: usize,
    pub rank_tol: f64,
    pub eigenvalues: Vec<f64>,
}

/// Row-major copy of a matrix for JSON inspection.
pub fn dump_matrix(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Symmetric eigendecomposition of a normalized Gram matrix.
///
/// The input is symmetrized as `(A + Aᵀ)/2` first; `rank_tol` is relative to
/// the largest eigenvalue.
pub fn eigensystem(gram: &Mat<f64>, rank_tol: f64) -> Result<EigenSystem> {
    let n = gram.nrows();
    if n == 0 || gram.ncols() != n {
        return Err(Error::input("eigensystem needs a nonempty square matrix"));
    }
    let mut scale = 0.0f64;
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let a = gram[(i, j)];
            if !a.is_finite() {
                return Err(Error::numeric("Gram matrix has non-finite entries"));
            }
            scale = scale.max(a.abs());
            asym = asym.max((a - gram[(j, i)]).abs());
        }
    }
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::input(format!("matrix is not symmetric (max defect {asym:e})")));
    }
    let sym = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (gram[(i, j)] + gram[(j, i)]));
    let evd = sym.self_adjoint_eigen(Side::Lower).map_err(|e| Error::numeric(format!("eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    // faer returns ascending order.
    let values: Vec<f64> = (0..n).rev().map(|k| s[k]).collect();
    let vectors = Mat::<f64>::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    let eig = EigenSystem::from_parts(values, vectors, rank_tol)?;
    Ok(eig)
}

/// Eigenvalues only, nonincreasing and clamped at zero. Much cheaper than
/// [`eigensystem`] for large `n`.
pub fn eigenvalues(gram: &Mat<f64>) -> Result<Vec<f64>> {
    let n = gram.nrows();
    if n == 0 || gram.ncols() != n {
        return Err(Error::input("eigenvalues need a nonempty square matrix"));
    }
    let sym = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (gram[(i, j)] + gram[(j, i)]));
    let mut vals =
        sym.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::numeric(format!("eigensolver failed: {e:?}")))?;
    vals.reverse();
    Ok(vals.into_iter().map(|v| v.max(0.0)).collect())
}

/// Responses expressed in the eigenbasis, `Z = Uᵀ Y`, with optional oracle
/// coefficients `G* = Uᵀ F*` and known noise variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotatedSample {
    pub z: Vec<f64>,
    pub g_star: Option<Vec<f64>>,
    pub sigma2: Option<f64>,
}

impl RotatedSample {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub(crate) fn oracle(&self) -> Result<(&[f64], f64)> {
        match (&self.g_star, self.sigma2) {
            (Some(g), Some(s2)) => Ok((g, s2)),
            (None, _) => Err(Error::state("oracle coefficients G* are not available")),
            (_, None) => Err(Error::state("the true noise variance is not available")),
        }
    }
}

/// Rotates responses (and optionally the true regression vector) into the
/// eigenbasis of `eig`.
pub fn rotate(eig: &EigenSystem, y: &[f64], f_star: Option<&[f64]>, sigma2: Option<f64>) -> Result<RotatedSample> {
    if let Some(s2) = sigma2 {
        if !(s2 >= 0.0) || !s2.is_finite() {
            return Err(Error::input(format!("noise variance must be >= 0, got {s2}")));
        }
    }
    let z = eig.project(y)?;
    let g_star = f_star.map(|f| eig.project(f)).transpose()?;
    Ok(RotatedSample { z, g_star, sigma2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
        let mut m = 0.0f64;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                m = m.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        m
    }

    #[test]
    fn kernel_values() {
        assert_eq!(eval_kernel(KernelKind::SobolevMin, 0.3, 0.7).unwrap(), 0.3);
        assert_eq!(eval_kernel(KernelKind::Polynomial { degree: 3 }, 0.5, 0.5).unwrap(), 1.953125);
        for x in [-3.0, 0.0, 0.4, 12.0] {
            assert_eq!(eval_kernel(KernelKind::Laplace { bandwidth: 1.0 }, x, x).unwrap(), 1.0);
        }
    }

    #[test]
    fn sobolev_rejects_out_of_domain() {
        assert!(matches!(eval_kernel(KernelKind::SobolevMin, -0.1, 0.5), Err(Error::Input(_))));
        assert!(matches!(eval_kernel(KernelKind::SobolevMin, 0.5, 1.5), Err(Error::Input(_))));
        assert!(eval_kernel(KernelKind::Gaussian { bandwidth: 1.0 }, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn kernel_parsing() {
        assert_eq!("sobolev".parse::<KernelKind>().unwrap(), KernelKind::SobolevMin);
        assert_eq!("poly:3".parse::<KernelKind>().unwrap(), KernelKind::Polynomial { degree: 3 });
        assert_eq!("laplace:0.5".parse::<KernelKind>().unwrap(), KernelKind::Laplace { bandwidth: 0.5 });
        assert!("poly:0".parse::<KernelKind>().is_err());
        assert!("gaussian:-1".parse::<KernelKind>().is_err());
        assert!("cosine".parse::<KernelKind>().is_err());
    }

    #[test]
    fn small_grams() {
        let g = build_gram(KernelKind::SobolevMin, &[1.0, 1.0]).unwrap();
        assert_eq!(dump_matrix(&g), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let g = build_gram(KernelKind::Polynomial { degree: 1 }, &[0.0, 0.0]).unwrap();
        assert_eq!(dump_matrix(&g), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(build_gram(KernelKind::SobolevMin, &[0.5]).is_err());
    }

    #[test]
    fn gram_matches_double_loop() {
        let xs: Vec<f64> = (1..=4).map(|j| j as f64 / 4.0).collect();
        let g = build_gram(KernelKind::SobolevMin, &xs).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let oracle = if xs[i] < xs[j] { xs[i] } else { xs[j] } / 4.0;
                assert!((g[(i, j)] - oracle).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn spectrum_without_vectors() {
        let eig = EigenSystem::spectrum_only(vec![0.1, 0.5, 0.0, 1e-14], 1e-10).unwrap();
        assert_eq!(eig.values(), &[0.5, 0.1, 1e-14, 0.0]);
        assert_eq!(eig.rank(), 2);
        assert!(!eig.has_vectors());
        assert!(matches!(eig.project(&[1.0; 4]), Err(Error::State(_))));
    }

    #[test]
    fn scaled_identity() {
        let m = Mat::<f64>::from_fn(4, 4, |i, j| if i == j { 0.25 } else { 0.0 });
        let eig = eigensystem(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(eig.rank(), 4);
        for &v in eig.values() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn polynomial_rank_is_bounded() {
        let xs: Vec<f64> = (1..=10).map(|j| j as f64 / 10.0).collect();
        let g = build_gram(KernelKind::Polynomial { degree: 3 }, &xs).unwrap();
        let eig = eigensystem(&g, DEFAULT_RANK_TOL).unwrap();
        assert!(eig.rank() <= 4, "rank {}", eig.rank());
        assert_eq!(eig.rank(), 4);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let xs: Vec<f64> = (0..25).map(|j| ((j * 7) % 25) as f64 / 25.0 + 0.01).collect();
        let g = build_gram(KernelKind::Laplace { bandwidth: 0.3 }, &xs).unwrap();
        let eig = eigensystem(&g, DEFAULT_RANK_TOL).unwrap();
        let u = eig.vectors();
        let d = Mat::<f64>::from_fn(25, 25, |i, j| if i == j { eig.values()[i] } else { 0.0 });
        let back = u * &d * u.transpose();
        assert!(max_abs_diff(&back, &g) <= 1e-8);
        let gram_u = u.transpose() * u;
        assert!(max_abs_diff(&gram_u, &Mat::identity(25, 25)) <= 1e-8);
        assert!(eig.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut m = Mat::<f64>::identity(3, 3);
        m[(0, 1)] = 0.5;
        assert!(matches!(eigensystem(&m, DEFAULT_RANK_TOL), Err(Error::Input(_))));
    }

    #[test]
    fn identity_rotation_and_length_checks() {
        let eig = EigenSystem::diagonal(vec![0.5, 0.3, 0.1]).unwrap();
        let rot = rotate(&eig, &[1.0, -2.0, 3.0], None, None).unwrap();
        assert_eq!(rot.z, vec![1.0, -2.0, 3.0]);
        assert!(matches!(rotate(&eig, &[1.0], None, None), Err(Error::Input(_))));
        assert!(rotate(&eig, &[1.0, 2.0, 3.0], Some(&[1.0]), None).is_err());
    }

    #[test]
    fn finite_rank_truth_has_zero_tail() {
        let kind = KernelKind::Polynomial { degree: 3 };
        let xs: Vec<f64> = (1..=30).map(|j| j as f64 / 30.0).collect();
        let eig = eigensystem(&build_gram(kind, &xs).unwrap(), DEFAULT_RANK_TOL).unwrap();
        // A cubic lies in the span of the polynomial kernel sections.
        let f: Vec<f64> = xs.iter().map(|x| 0.3 - x + 2.0 * x * x * x).collect();
        let rot = rotate(&eig, &f, Some(&f), Some(0.0)).unwrap();
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = rot.g_star.unwrap();
        for gi in &g[eig.rank()..] {
            assert!(gi.abs() <= 1e-6 * norm, "tail coefficient {gi}");
        }
    }

    #[test]
    fn dump_is_json() {
        let eig = EigenSystem::diagonal(vec![1.0, 0.5, 0.0]).unwrap();
        let json = serde_json::to_string(&eig.dump()).unwrap();
        assert!(json.contains("\"rank\":2"));
        let back: EigenDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back, eig.dump());
    }
}
