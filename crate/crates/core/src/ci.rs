//! Randomized and classical confidence intervals for the mean.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linproc::{mean, sample_autocov};
use crate::normal::z_two_sided;
use crate::studentize::{hac_classical, randomized_studentizer, StudentizeParams};
use crate::weights::WeightScheme;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Randomized,
    Classical,
    Block,
    #[serde(rename = "augsieve")]
    AugSieve,
    Sieve,
}

impl CiMethod {
    pub const ALL: [CiMethod; 5] = [
        CiMethod::Randomized,
        CiMethod::Classical,
        CiMethod::Block,
        CiMethod::AugSieve,
        CiMethod::Sieve,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CiMethod::Randomized => "randomized",
            CiMethod::Classical => "classical",
            CiMethod::Block => "block",
            CiMethod::AugSieve => "augsieve",
            CiMethod::Sieve => "sieve",
        }
    }
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CiMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalDiagnostics {
    pub theta: Option<f64>,
    pub q: Option<usize>,
    pub d_used: Option<f64>,
    /// `sum (w_i - theta)`.
    pub denominator: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub method: CiMethod,
    pub length: f64,
    pub diagnostics: IntervalDiagnostics,
}

impl Interval {
    pub fn covers(&self, mu: f64) -> bool {
        self.lo <= mu && mu <= self.hi
    }

    /// CSV record `method,lo,hi,length,covered`.
    pub fn csv_record(&self, mu: f64) -> [String; 5] {
        [
            self.method.to_string(),
            format!("{:e}", self.lo),
            format!("{:e}", self.hi),
            format!("{:e}", self.length),
            (self.covers(mu) as u8).to_string(),
        ]
    }
}

pub const CSV_HEADER: [&str; 5] = ["method", "lo", "hi", "length", "covered"];

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedCiParams<'a> {
    pub scheme: &'a WeightScheme,
    pub theta: f64,
    pub alpha: f64,
    pub d: f64,
    pub q: usize,
    pub complete: bool,
}

impl<'a> RandomizedCiParams<'a> {
    fn studentize(&self) -> StudentizeParams<'a> {
        StudentizeParams {
            scheme: self.scheme,
            theta: self.theta,
            d: self.d,
            q: self.q,
            complete: self.complete,
        }
    }
}

/// Endpoints `(sum (w_i - theta) X_i -/+ z n^{1/2+d} sqrt(S)) / sum (w_i - theta)`.
pub fn randomized_ci(x: &[f64], weights: &[f64], p: &RandomizedCiParams) -> Result<Interval> {
    check_alpha(p.alpha)?;
    let n = x.len();
    let denominator: f64 = weights.iter().map(|w| w - p.theta).sum();
    if denominator.abs() <= f64::EPSILON * n as f64 * p.theta.abs().max(1.0) {
        return Err(Error::ZeroDenominator);
    }
    let hac = randomized_studentizer(x, weights, &p.studentize())?;
    let weighted: f64 = x.iter().zip(weights).map(|(v, w)| (w - p.theta) * v).sum();
    let half = z_two_sided(p.alpha) * (n as f64).powf(0.5 + p.d) * hac.value.sqrt();
    let a = (weighted - half) / denominator;
    let b = (weighted + half) / denominator;
    Ok(Interval {
        lo: a.min(b),
        hi: a.max(b),
        alpha: p.alpha,
        method: CiMethod::Randomized,
        length: 2.0 * half / denominator.abs(),
        diagnostics: IntervalDiagnostics {
            theta: Some(p.theta),
            q: Some(p.q),
            d_used: Some(p.d),
            denominator: Some(denominator),
        },
    })
}

/// `mean(X) -/+ z n^{-1/2+d} sqrt(classical studentizer)`.
pub fn classical_ci(x: &[f64], alpha: f64, d: f64, q: usize) -> Result<Interval> {
    check_alpha(alpha)?;
    let hac = hac_classical(&sample_autocov(x, q)?, q, d)?;
    let half = z_two_sided(alpha) * (x.len() as f64).powf(-0.5 + d) * hac.value.sqrt();
    let m = mean(x);
    Ok(Interval {
        lo: m - half,
        hi: m + half,
        alpha,
        method: CiMethod::Classical,
        length: 2.0 * half,
        diagnostics: IntervalDiagnostics {
            q: Some(q),
            d_used: Some(d),
            ..Default::default()
        },
    })
}
