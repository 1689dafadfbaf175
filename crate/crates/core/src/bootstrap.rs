//! Bootstrap baselines for the mean: AR sieve, fractionally filtered sieve,
//! and moving blocks. All three use percentile intervals.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ci::{CiMethod, Interval, IntervalDiagnostics};
use crate::linproc::{ma_coefficients, mean, Innovation, ProcessSpec};
use crate::rng::SimRng;
use crate::studentize::estimate_memory;
use crate::{Error, Result};

const BURN_IN: usize = 100;
const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BootstrapMethod {
    Sieve { pmax: usize },
    FilteredSieve { pmax: usize },
    Block { block_len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub b: usize,
    pub method: BootstrapMethod,
    pub alpha: f64,
}

impl BootstrapConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.b < MIN_RESAMPLES {
            return Err(Error::ParameterDomain(format!(
                "need at least {MIN_RESAMPLES} resamples, got {}",
                self.b
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::ParameterDomain(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        match self.method {
            BootstrapMethod::Sieve { pmax } | BootstrapMethod::FilteredSieve { pmax } => {
                if pmax == 0 || n <= 2 * pmax {
                    return Err(Error::ParameterDomain(format!(
                        "sieve needs 1 <= pmax < n/2 (pmax = {pmax}, n = {n})"
                    )));
                }
            }
            BootstrapMethod::Block { block_len } => {
                if block_len == 0 || block_len > n {
                    return Err(Error::ParameterDomain(format!(
                        "block length {block_len} outside [1, {n}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `ceil(10 log10 n)`.
pub fn default_pmax(n: usize) -> usize {
    (10.0 * (n as f64).log10()).ceil() as usize
}

/// `ceil(sqrt(n))`.
pub fn default_block_len(n: usize) -> usize {
    ((n as f64).sqrt() - 1e-9).ceil() as usize
}

/// Least-squares autoregression on a demeaned series.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub coeffs: Vec<f64>,
    /// Centered residuals.
    pub residuals: Vec<f64>,
    pub sigma2: f64,
}

fn ols(y: &[f64], p: usize, start: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = y.len();
    let rows = n - start;
    let design = DMatrix::from_fn(rows, p, |r, j| y[start + r - j - 1]);
    let target = DVector::from_iterator(rows, y[start..].iter().copied());
    let gram = design.transpose() * &design;
    let rhs = design.transpose() * &target;
    let coeffs = gram
        .cholesky()
        .ok_or_else(|| Error::Fit(format!("singular normal equations at order {p}")))?
        .solve(&rhs);
    let resid = &target - &design * &coeffs;
    Ok((coeffs.iter().copied().collect(), resid.iter().copied().collect()))
}

/// Step-down recursion: every partial autocorrelation must lie inside `(-1, 1)`.
fn stationary(coeffs: &[f64]) -> bool {
    let mut phi = coeffs.to_vec();
    for k in (1..=phi.len()).rev() {
        let kappa = phi[k - 1];
        if !(kappa.abs() < 1.0) {
            return false;
        }
        let denom = 1.0 - kappa * kappa;
        phi = (0..k - 1).map(|j| (phi[j] + kappa * phi[k - 2 - j]) / denom).collect();
    }
    true
}

/// AR(p) fit with `p` chosen by AIC over `1..=pmax` on the common sample,
/// then refit at the chosen order on all usable observations.
pub fn fit_ar(x: &[f64], pmax: usize) -> Result<ArFit> {
    let n = x.len();
    if pmax == 0 || n <= 2 * pmax {
        return Err(Error::ParameterDomain(format!(
            "need n > 2 pmax (n = {n}, pmax = {pmax})"
        )));
    }
    if x.iter().all(|v| *v == x[0]) {
        return Err(Error::Fit("constant series".into()));
    }
    let m = mean(x);
    let y: Vec<f64> = x.iter().map(|v| v - m).collect();
    let common = (n - pmax) as f64;
    let mut best: Option<(f64, usize)> = None;
    for p in 1..=pmax {
        let (_, resid) = ols(&y, p, pmax)?;
        let s2 = resid.iter().map(|e| e * e).sum::<f64>() / common;
        if !(s2 > 0.0) {
            return Err(Error::Fit("zero residual variance".into()));
        }
        let aic = common * s2.ln() + 2.0 * p as f64;
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, p));
        }
    }
    let p = best.expect("pmax >= 1").1;
    let (coeffs, resid) = ols(&y, p, p)?;
    if !stationary(&coeffs) {
        return Err(Error::Fit(format!("fitted AR({p}) is not stationary")));
    }
    let rbar = mean(&resid);
    let residuals: Vec<f64> = resid.iter().map(|e| e - rbar).collect();
    let sigma2 = residuals.iter().map(|e| e * e).sum::<f64>() / residuals.len() as f64;
    Ok(ArFit {
        coeffs,
        residuals,
        sigma2,
    })
}

/// One sieve resample of length `n`, started from zeros after a burn-in.
fn sieve_path(fit: &ArFit, n: usize, rng: &mut SimRng, out: &mut Vec<f64>) {
    let p = fit.coeffs.len();
    let r = fit.residuals.len();
    out.clear();
    out.resize(n + BURN_IN, 0.0);
    for t in 0..n + BURN_IN {
        let mut acc = fit.residuals[rng.random_range(0..r)];
        for (j, phi) in fit.coeffs.iter().enumerate().take(p.min(t)) {
            acc += phi * out[t - j - 1];
        }
        out[t] = acc;
    }
    out.drain(..BURN_IN);
}

/// Order-statistic percentile interval from bootstrap means.
pub fn percentile_interval(mut means: Vec<f64>, alpha: f64) -> (f64, f64) {
    means.sort_by(f64::total_cmp);
    let b = means.len();
    let k = ((b as f64 * alpha / 2.0) - 1e-9).ceil().max(1.0) as usize;
    (means[k - 1], means[b - k])
}

fn interval(means: Vec<f64>, alpha: f64, method: CiMethod, d_used: Option<f64>) -> Interval {
    let (lo, hi) = percentile_interval(means, alpha);
    Interval {
        lo,
        hi,
        alpha,
        method,
        length: hi - lo,
        diagnostics: IntervalDiagnostics {
            d_used,
            ..Default::default()
        },
    }
}

/// Bootstrap means of the raw AR sieve.
pub fn sieve_means(x: &[f64], b: usize, pmax: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
    let fit = fit_ar(x, pmax)?;
    let m = mean(x);
    let mut path = Vec::with_capacity(x.len() + BURN_IN);
    Ok((0..b)
        .map(|_| {
            sieve_path(&fit, x.len(), rng, &mut path);
            mean(&path) + m
        })
        .collect())
}

pub fn sieve_ci(x: &[f64], cfg: &BootstrapConfig, rng: &mut SimRng) -> Result<Interval> {
    cfg.validate(x.len())?;
    let BootstrapMethod::Sieve { pmax } = cfg.method else {
        return Err(Error::Config("sieve_ci needs a sieve configuration".into()));
    };
    Ok(interval(
        sieve_means(x, cfg.b, pmax, rng)?,
        cfg.alpha,
        CiMethod::Sieve,
        None,
    ))
}

/// Coefficients of the truncated `(1 - B)^d` expansion.
pub fn fractional_difference_coeffs(d: f64, len: usize) -> Vec<f64> {
    let mut pi = vec![0.0; len];
    if len > 0 {
        pi[0] = 1.0;
    }
    for k in 1..len {
        pi[k] = pi[k - 1] * (k as f64 - 1.0 - d) / k as f64;
    }
    pi
}

/// Causal truncated convolution `out_t = sum_{k <= t} c_k y_{t-k}`.
pub fn causal_filter(y: &[f64], c: &[f64]) -> Vec<f64> {
    (0..y.len()).map(|t| (0..=t).map(|k| c[k] * y[t - k]).sum()).collect()
}

/// Expansion of `(1 - B)^{-d}`; zero `d` gives the identity filter.
fn integration_coeffs(d: f64, len: usize) -> Result<Vec<f64>> {
    if d == 0.0 {
        let mut c = vec![0.0; len];
        c[0] = 1.0;
        return Ok(c);
    }
    ma_coefficients(&ProcessSpec::fid(d, Innovation::StdNormal), len)
}

/// Bootstrap means of the filtered sieve and the memory estimate used.
///
/// The series is demeaned, filtered with `(1 - B)^{d_hat}`, resampled by the
/// raw sieve, and integrated back with `(1 - B)^{-d_hat}`. Only the mean of
/// each integrated path is needed, which equals `(1/n) sum_s u*_s Psi_{n-1-s}`
/// with `Psi` the cumulative integration coefficients.
pub fn filtered_sieve_means(x: &[f64], b: usize, pmax: usize, rng: &mut SimRng) -> Result<(Vec<f64>, f64)> {
    let n = x.len();
    let d_hat = estimate_memory(x)?.d_hat;
    let m = mean(x);
    let y: Vec<f64> = x.iter().map(|v| v - m).collect();
    let filtered = causal_filter(&y, &fractional_difference_coeffs(d_hat, n));
    let fit = fit_ar(&filtered, pmax)?;
    let fbar = mean(&filtered);
    let psi = integration_coeffs(d_hat, n)?;
    let cum: Vec<f64> = psi
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let mut path = Vec::with_capacity(n + BURN_IN);
    let means = (0..b)
        .map(|_| {
            sieve_path(&fit, n, rng, &mut path);
            let total: f64 = path.iter().enumerate().map(|(s, u)| (u + fbar) * cum[n - 1 - s]).sum();
            total / n as f64 + m
        })
        .collect();
    Ok((means, d_hat))
}

pub fn filtered_sieve_ci(x: &[f64], cfg: &BootstrapConfig, rng: &mut SimRng) -> Result<Interval> {
    cfg.validate(x.len())?;
    let BootstrapMethod::FilteredSieve { pmax } = cfg.method else {
        return Err(Error::Config(
            "filtered_sieve_ci needs a filtered-sieve configuration".into(),
        ));
    };
    let (means, d_hat) = filtered_sieve_means(x, cfg.b, pmax, rng)?;
    Ok(interval(means, cfg.alpha, CiMethod::AugSieve, Some(d_hat)))
}

/// Bootstrap means of the moving-block bootstrap.
pub fn block_means(x: &[f64], b: usize, block_len: usize, rng: &mut SimRng) -> Vec<f64> {
    let n = x.len();
    let blocks = n.div_ceil(block_len);
    // Prefix sums make each block sum O(1).
    let mut prefix = vec![0.0; n + 1];
    for (i, v) in x.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..b)
        .map(|_| {
            let mut total = 0.0;
            let mut remaining = n;
            for _ in 0..blocks {
                let start = rng.random_range(0..=n - block_len);
                let take = block_len.min(remaining);
                total += prefix[start + take] - prefix[start];
                remaining -= take;
            }
            total / n as f64
        })
        .collect()
}

pub fn block_ci(x: &[f64], cfg: &BootstrapConfig, rng: &mut SimRng) -> Result<Interval> {
    cfg.validate(x.len())?;
    let BootstrapMethod::Block { block_len } = cfg.method else {
        return Err(Error::Config("block_ci needs a block configuration".into()));
    };
    Ok(interval(
        block_means(x, cfg.b, block_len, rng),
        cfg.alpha,
        CiMethod::Block,
        None,
    ))
}

/// Dispatches on the configured method.
pub fn bootstrap_ci(x: &[f64], cfg: &BootstrapConfig, rng: &mut SimRng) -> Result<Interval> {
    match cfg.method {
        BootstrapMethod::Sieve { .. } => sieve_ci(x, cfg, rng),
        BootstrapMethod::FilteredSieve { .. } => filtered_sieve_ci(x, cfg, rng),
        BootstrapMethod::Block { .. } => block_ci(x, cfg, rng),
    }
}
