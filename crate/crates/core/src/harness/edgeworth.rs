//! Sup-distance of the pivots' Monte Carlo CDF to the normal, across sample sizes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::thread_pool;
use crate::linproc::{theoretical_moments, ProcessSpec, Simulator};
use crate::normal::ks_distance;
use crate::pivot::{classical_variance, pivot_classical, pivot_randomized};
use crate::rng::{substream, StreamRole};
use crate::weights::{gen_weights, WeightScheme};
use crate::window::{model_cubic_coefficients, solve_window_constant, SelectionPolicy};
use crate::{Error, Result};

pub const MIN_GRID: usize = 3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRunSettings {
    pub grid: Vec<usize>,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Refuse weight laws whose fifth moment is not known to be finite.
    #[serde(default = "yes")]
    pub require_fifth_moment: bool,
    #[serde(default)]
    pub policy: SelectionPolicy,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorCurveConfig {
    pub process: ProcessSpec,
    pub weights: WeightScheme,
    pub edgeworth: ErrorRunSettings,
}

impl ErrorCurveConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        self.process.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.weights.validate().map_err(|e| Error::Config(e.to_string()))?;
        let e = &self.edgeworth;
        if e.grid.len() < MIN_GRID {
            return bad("the n grid needs at least three points");
        }
        if e.grid.windows(2).any(|p| p[0] >= p[1]) || e.grid[0] < 4 {
            return bad("the n grid must be strictly increasing and start at n >= 4");
        }
        if self.process.memory_parameter() != 0.0 {
            return bad("the error-rate experiment needs a short-memory process");
        }
        if e.require_fifth_moment && !self.weights.fifth_moment_finite() {
            return bad("weights must have a finite fifth moment");
        }
        if e.replications < 1000 {
            return bad("replications must be at least 1000");
        }
        if e.threads == Some(0) {
            return bad("threads must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub grid: Vec<usize>,
    pub theta: Vec<f64>,
    pub classical: Vec<f64>,
    pub randomized: Vec<f64>,
    pub classical_slope: f64,
    pub randomized_slope: f64,
}

impl ErrorCurve {
    /// Plot-ready CSV `n,theta,classical,randomized`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "theta", "classical", "randomized"])?;
        for i in 0..self.grid.len() {
            out.write_record([
                self.grid[i].to_string(),
                format!("{:e}", self.theta[i]),
                format!("{:e}", self.classical[i]),
                format!("{:e}", self.randomized[i]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(x: &[usize], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| (*v as f64).ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Classical and randomized-at-root pivots with exact model normalizers.
pub fn edgeworth_error_experiment(cfg: &ErrorCurveConfig) -> Result<ErrorCurve> {
    cfg.validate()?;
    let e = &cfg.edgeworth;
    let spec = &cfg.process;
    let scheme = &cfg.weights;
    let pool = thread_pool(e.threads)?;
    let mut curve = ErrorCurve {
        grid: e.grid.clone(),
        theta: Vec::new(),
        classical: Vec::new(),
        randomized: Vec::new(),
        classical_slope: f64::NAN,
        randomized_slope: f64::NAN,
    };
    for (gi, &n) in e.grid.iter().enumerate() {
        let gamma = theoretical_moments(spec, n - 1, 0, None)?.gamma;
        let var_sum = classical_variance(&gamma, n)?;
        let coeffs = model_cubic_coefficients(spec, scheme, n)?;
        let theta = solve_window_constant(&coeffs, scheme, n, e.policy)?.selected;
        let sim = Simulator::new(spec, n)?;
        let pairs: Vec<Result<(f64, f64)>> = pool.install(|| {
            (0..e.replications as u64)
                .into_par_iter()
                .map(|rep| {
                    let x = sim.draw(&mut substream(e.seed, rep, StreamRole::Data, gi as u64));
                    let w = gen_weights(scheme, n, &mut substream(e.seed, rep, StreamRole::Weights, gi as u64))?;
                    let c = pivot_classical(&x, spec.mu, var_sum)?.value;
                    let r = pivot_randomized(&x, &w, theta, spec.mu, scheme, &gamma)?.value;
                    Ok((c, r))
                })
                .collect()
        });
        let (classical, randomized): (Vec<f64>, Vec<f64>) =
            pairs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
        curve.theta.push(theta);
        curve.classical.push(ks_distance(&classical));
        curve.randomized.push(ks_distance(&randomized));
    }
    curve.classical_slope = log_log_slope(&curve.grid, &curve.classical);
    curve.randomized_slope = log_log_slope(&curve.grid, &curve.randomized);
    Ok(curve)
}
