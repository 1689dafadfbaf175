//! Classical and randomized pivots for the mean with exact normalizers.
//!
//! Autocovariance slices may be shorter than `n`; lags past the end count as zero.

use serde::{Deserialize, Serialize};

use crate::weights::{pattern_moments, WeightScheme};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PivotKind {
    Classical,
    Randomized { theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotValue {
    pub value: f64,
    pub numerator: f64,
    /// Variance of the numerator.
    pub normalizer: f64,
    pub kind: PivotKind,
}

/// `sum_{h=1}^{n-1} (1 - h/n) gamma_h`.
pub fn tapered_lag_sum(gamma: &[f64], n: usize) -> f64 {
    let nf = n as f64;
    (1..n.min(gamma.len())).map(|h| (1.0 - h as f64 / nf) * gamma[h]).sum()
}

/// `Var(sum X_i) = n (gamma_0 + 2 sum (1 - h/n) gamma_h)`.
pub fn classical_variance(gamma: &[f64], n: usize) -> Result<f64> {
    let v = n as f64 * (gamma[0] + 2.0 * tapered_lag_sum(gamma, n));
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DegenerateVariance(format!("variance of the sum is {v}")))
    }
}

/// `Var(sum (w_i - theta) X_i) = n [m2 gamma_0 + 2 m2cross sum (1 - h/n) gamma_h]`.
pub fn randomized_variance(scheme: &WeightScheme, theta: f64, gamma: &[f64], n: usize) -> Result<f64> {
    let pm = pattern_moments(scheme, theta, n);
    let v = n as f64 * (pm.m2 * gamma[0] + 2.0 * pm.m2cross * tapered_lag_sum(gamma, n));
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DegenerateVariance(format!("randomized variance is {v}")))
    }
}

pub fn pivot_classical(x: &[f64], mu: f64, var_sum: f64) -> Result<PivotValue> {
    if !(var_sum > 0.0) {
        return Err(Error::DegenerateVariance(format!("variance of the sum is {var_sum}")));
    }
    let numerator: f64 = x.iter().map(|v| v - mu).sum();
    Ok(PivotValue {
        value: numerator / var_sum.sqrt(),
        numerator,
        normalizer: var_sum,
        kind: PivotKind::Classical,
    })
}

/// `sum (w_i - theta)(X_i - mu) / sqrt(n D)` with `n D` from the autocovariances `gamma`.
pub fn pivot_randomized(
    x: &[f64],
    weights: &[f64],
    theta: f64,
    mu: f64,
    scheme: &WeightScheme,
    gamma: &[f64],
) -> Result<PivotValue> {
    if weights.len() != x.len() {
        return Err(Error::ParameterDomain("weights and series differ in length".into()));
    }
    let normalizer = randomized_variance(scheme, theta, gamma, x.len())?;
    let numerator: f64 = x.iter().zip(weights).map(|(v, w)| (w - theta) * (v - mu)).sum();
    Ok(PivotValue {
        value: numerator / normalizer.sqrt(),
        numerator,
        normalizer,
        kind: PivotKind::Randomized { theta },
    })
}

/// `Var(sum (w_i - theta) X_i | w)` for fixed weights.
pub fn conditional_variance(weights: &[f64], theta: f64, gamma: &[f64]) -> f64 {
    let c: Vec<f64> = weights.iter().map(|w| w - theta).collect();
    let n = c.len();
    let mut total = gamma[0] * c.iter().map(|v| v * v).sum::<f64>();
    for h in 1..n.min(gamma.len()) {
        let cross: f64 = c[..n - h].iter().zip(&c[h..]).map(|(a, b)| a * b).sum();
        total += 2.0 * gamma[h] * cross;
    }
    total
}
