//! Monte Carlo experiments: interval coverage, pivot error rates, table presets.

pub mod config;
pub mod coverage;
pub mod edgeworth;
pub mod presets;
pub mod report;

pub use config::{BootstrapSettings, ExperimentConfig, MemoryMode, NamedTheta, RunSettings, ThetaMode};
pub use coverage::{coverage_experiment, CoverageReport, MethodRow};
pub use edgeworth::{edgeworth_error_experiment, log_log_slope, ErrorCurve, ErrorCurveConfig, ErrorRunSettings};
pub use report::{reports_to_string, write_reports, REPORT_HEADER};

use crate::{Error, Result};

pub const THREADS_ENV: &str = "RANDPIVOT_THREADS";

/// Worker count: the requested number, capped by `RANDPIVOT_THREADS` when set.
pub fn worker_count(requested: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|v| *v > 0);
    let wanted = requested.unwrap_or(available);
    cap.map_or(wanted, |c| wanted.min(c)).max(1)
}

pub(crate) fn thread_pool(requested: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(requested))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}
