//! Monte Carlo coverage of the interval methods.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, MemoryMode, NamedTheta, ThetaMode};
use super::thread_pool;
use crate::bootstrap::{bootstrap_ci, default_block_len, default_pmax, BootstrapConfig, BootstrapMethod};
use crate::ci::{classical_ci, randomized_ci, CiMethod, Interval, RandomizedCiParams};
use crate::linproc::{plugin_moments, Simulator};
use crate::rng::{stream, substream, StreamRole};
use crate::studentize::{bandwidth, estimate_memory};
use crate::weights::{gen_weights, WeightScheme};
use crate::window::{cubic_coefficients, model_cubic_coefficients, solve_window_constant};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: CiMethod,
    /// Covered replications over attempted replications.
    pub coverage: f64,
    pub mean_length: f64,
    pub median_length: f64,
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub config: ExperimentConfig,
    /// Window constant shared by all replications, when there is one.
    pub theta: Option<f64>,
    pub rows: Vec<MethodRow>,
    pub wall_seconds: f64,
}

impl CoverageReport {
    pub fn row(&self, method: CiMethod) -> Option<&MethodRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

type Outcome = Option<(bool, f64)>;

struct Plan<'a> {
    cfg: &'a ExperimentConfig,
    sim: Simulator,
    scheme: Option<&'a WeightScheme>,
    theta: Option<f64>,
    methods: Vec<CiMethod>,
}

/// Window constant for the whole run, or `None` when it is re-estimated per replication.
fn shared_theta(cfg: &ExperimentConfig) -> Result<Option<f64>> {
    let e = &cfg.experiment;
    let Some(scheme) = cfg
        .weights
        .as_ref()
        .filter(|_| e.methods.contains(&CiMethod::Randomized))
    else {
        return Ok(None);
    };
    match e.theta {
        ThetaMode::Fixed(t) => Ok(Some(t)),
        ThetaMode::Named(NamedTheta::PlugIn) => Ok(None),
        ThetaMode::Named(NamedTheta::Model) => {
            let coeffs = model_cubic_coefficients(&cfg.process, scheme, e.n)?;
            Ok(Some(solve_window_constant(&coeffs, scheme, e.n, e.policy)?.selected))
        }
    }
}

impl Plan<'_> {
    fn replication(&self, rep: u64) -> Vec<Outcome> {
        let e = &self.cfg.experiment;
        let mu = self.cfg.process.mu;
        let x = self.sim.draw(&mut stream(e.seed, rep, StreamRole::Data));
        let weights = self
            .scheme
            .and_then(|s| gen_weights(s, e.n, &mut stream(e.seed, rep, StreamRole::Weights)).ok());
        let d = match e.d_mode {
            MemoryMode::Known => Some(self.cfg.process.memory_parameter()),
            MemoryMode::Estimated => estimate_memory(&x).ok().map(|m| m.d_hat),
        };
        let d = || d.ok_or_else(|| Error::Estimation("memory parameter".into()));
        let q = |d: f64| e.q.unwrap_or_else(|| bandwidth(e.n, d, e.q_rule));

        self.methods
            .iter()
            .map(|&method| {
                let interval: Result<Interval> = match method {
                    CiMethod::Randomized => (|| {
                        let scheme = self.scheme.expect("validated");
                        let w = weights
                            .as_deref()
                            .ok_or_else(|| Error::DegenerateData("weights".into()))?;
                        let d = d()?;
                        let q = q(d);
                        let theta = match self.theta {
                            Some(t) => t,
                            None => {
                                let mom = plugin_moments(&x, q, q)?;
                                let coeffs = cubic_coefficients(&mom, scheme, e.n)?;
                                solve_window_constant(&coeffs, scheme, e.n, e.policy)?.selected
                            }
                        };
                        let p = RandomizedCiParams {
                            scheme,
                            theta,
                            alpha: e.alpha,
                            d,
                            q,
                            complete: e.complete,
                        };
                        randomized_ci(&x, w, &p)
                    })(),
                    CiMethod::Classical => d().and_then(|d| classical_ci(&x, e.alpha, d, q(d))),
                    boot => {
                        let b = &self.cfg.bootstrap;
                        let method = match boot {
                            CiMethod::Sieve => BootstrapMethod::Sieve {
                                pmax: b.pmax.unwrap_or_else(|| default_pmax(e.n)),
                            },
                            CiMethod::AugSieve => BootstrapMethod::FilteredSieve {
                                pmax: b.pmax.unwrap_or_else(|| default_pmax(e.n)),
                            },
                            _ => BootstrapMethod::Block {
                                block_len: b.block_len.unwrap_or_else(|| default_block_len(e.n)),
                            },
                        };
                        let bc = BootstrapConfig {
                            b: b.b,
                            method,
                            alpha: e.alpha,
                        };
                        let index = CiMethod::ALL.iter().position(|m| *m == boot).unwrap_or(0) as u64;
                        bootstrap_ci(&x, &bc, &mut substream(e.seed, rep, StreamRole::Bootstrap, index))
                    }
                };
                interval.ok().map(|ci| (ci.covers(mu), ci.length))
            })
            .collect()
    }
}

fn summarize(method: CiMethod, outcomes: impl Iterator<Item = Outcome>, attempted: usize) -> MethodRow {
    let mut covered = 0usize;
    let mut lengths = Vec::with_capacity(attempted);
    for (c, len) in outcomes.flatten() {
        covered += c as usize;
        lengths.push(len);
    }
    let discarded = attempted - lengths.len();
    let (mean_length, median_length) = if lengths.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        lengths.sort_by(f64::total_cmp);
        let m = lengths.len();
        let median = if m % 2 == 1 {
            lengths[m / 2]
        } else {
            0.5 * (lengths[m / 2 - 1] + lengths[m / 2])
        };
        (lengths.iter().sum::<f64>() / m as f64, median)
    };
    MethodRow {
        method,
        coverage: covered as f64 / attempted as f64,
        mean_length,
        median_length,
        discarded,
    }
}

/// Runs every replication and aggregates per method. Failed intervals are
/// counted as discarded and as not covering.
pub fn coverage_experiment(cfg: &ExperimentConfig) -> Result<CoverageReport> {
    cfg.validate()?;
    let start = Instant::now();
    let e = &cfg.experiment;
    let plan = Plan {
        cfg,
        sim: Simulator::new(&cfg.process, e.n).map_err(|err| Error::Config(err.to_string()))?,
        scheme: cfg
            .weights
            .as_ref()
            .filter(|_| e.methods.contains(&CiMethod::Randomized)),
        theta: shared_theta(cfg).map_err(|err| Error::Config(format!("window constant: {err}")))?,
        methods: e.methods.iter().copied().collect(),
    };
    let over_budget = AtomicBool::new(false);
    let outcomes: Vec<Vec<Outcome>> = thread_pool(e.threads)?.install(|| {
        (0..e.replications as u64)
            .into_par_iter()
            .map(|rep| {
                if let Some(limit) = e.max_seconds {
                    if over_budget.load(Ordering::Relaxed) || start.elapsed().as_secs_f64() > limit {
                        over_budget.store(true, Ordering::Relaxed);
                        return Vec::new();
                    }
                }
                plan.replication(rep)
            })
            .collect()
    });
    if over_budget.load(Ordering::Relaxed) {
        return Err(Error::RuntimeBudget(e.max_seconds.unwrap_or_default()));
    }
    let rows = plan
        .methods
        .iter()
        .enumerate()
        .map(|(i, &m)| summarize(m, outcomes.iter().map(|o| o[i]), e.replications))
        .collect();
    Ok(CoverageReport {
        config: cfg.clone(),
        theta: plan.theta,
        rows,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
