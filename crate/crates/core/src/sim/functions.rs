//! Regression functions used by the simulations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressionFunction {
    /// `|x - 1/2| - 1/2`.
    PiecewiseLinear,
    /// `0.093 (4 sin(4πx) - sgn(x - 0.3) - sgn(0.72 - x))`, with `sgn(0) = 0`.
    Heavisine,
    /// `0.9 sin(8πx) x²`.
    Sinus,
    /// `Σ_k coeffs[k] x^k`; lies in the span of a polynomial kernel of
    /// degree at least `coeffs.len() - 1`.
    Polynomial { coeffs: Vec<f64> },
    /// Linear interpolation through `(xs, ys)`, constant beyond the ends.
    Custom { xs: Vec<f64>, ys: Vec<f64> },
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl RegressionFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            RegressionFunction::Polynomial { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => {
                Err(Error::config("polynomial coefficients must be finite"))
            }
            RegressionFunction::Custom { xs, ys } => {
                if xs.is_empty() || xs.len() != ys.len() {
                    return Err(Error::config("tabulated target needs matching, nonempty xs and ys"));
                }
                if xs.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::config("tabulated target xs must be strictly increasing"));
                }
                if xs.iter().chain(ys).any(|v| !v.is_finite()) {
                    return Err(Error::config("tabulated target has non-finite values"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RegressionFunction::PiecewiseLinear => (x - 0.5).abs() - 0.5,
            RegressionFunction::Heavisine => 0.093 * (4.0 * (4.0 * PI * x).sin() - sgn(x - 0.3) - sgn(0.72 - x)),
            RegressionFunction::Sinus => 0.9 * (8.0 * PI * x).sin() * x * x,
            RegressionFunction::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            RegressionFunction::Custom { xs, ys } => {
                let k = xs.partition_point(|&v| v <= x);
                if k == 0 {
                    ys[0]
                } else if k == xs.len() {
                    ys[k - 1]
                } else {
                    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    ys[k - 1] + w * (ys[k] - ys[k - 1])
                }
            }
        }
    }

    pub fn eval_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

impl std::str::FromStr for RegressionFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "piecewise_linear" | "pl" => Ok(RegressionFunction::PiecewiseLinear),
            "heavisine" => Ok(RegressionFunction::Heavisine),
            "sinus" | "sine" => Ok(RegressionFunction::Sinus),
            _ => Err(Error::input(format!("unknown regression function {s:?}"))),
        }
    }
}
