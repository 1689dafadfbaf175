//! Experiment configuration and its TOML form.
//!
//! ```toml
//! [process]
//! kind = "ar1"            # ar1 | fid | ma_finite | white
//! phi = 0.8
//! innovation = "std_lognormal"
//! mu = 0.0
//!
//! [weights]
//! scheme = "iid_bernoulli" # iid_bernoulli | iid_custom | sym_multinomial
//! p = 0.25
//!
//! [experiment]
//! n = 200
//! replications = 2000
//! alpha = 0.05
//! methods = ["randomized", "classical"]
//! seed = 1
//! q_rule = "short_memory"  # or long_memory
//! theta = "model"          # model | plug_in | a number
//!
//! [bootstrap]
//! b = 1000
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ci::CiMethod;
use crate::linproc::ProcessSpec;
use crate::studentize::BandwidthRule;
use crate::weights::WeightScheme;
use crate::window::SelectionPolicy;
use crate::{Error, Result};

pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedTheta {
    Model,
    PlugIn,
}

/// How the window constant is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaMode {
    Fixed(f64),
    Named(NamedTheta),
}

impl Default for ThetaMode {
    fn default() -> Self {
        ThetaMode::Named(NamedTheta::Model)
    }
}

impl std::str::FromStr for ThetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(ThetaMode::Named(NamedTheta::Model)),
            "plug_in" | "plugin" => Ok(ThetaMode::Named(NamedTheta::PlugIn)),
            other => other
                .parse::<f64>()
                .map(ThetaMode::Fixed)
                .map_err(|_| Error::Config(format!("theta must be `model`, `plug_in` or a number, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMode {
    /// Memory parameter of the generating process.
    #[default]
    Known,
    /// Local Whittle estimate per replication.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapSettings {
    pub b: usize,
    /// Sieve order cap; `ceil(10 log10 n)` when absent.
    pub pmax: Option<usize>,
    /// Block length; `ceil(sqrt(n))` when absent.
    pub block_len: Option<usize>,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            b: 1000,
            pmax: None,
            block_len: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub n: usize,
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub methods: BTreeSet<CiMethod>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub q_rule: BandwidthRule,
    /// Explicit bandwidth overriding `q_rule`.
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default)]
    pub theta: ThetaMode,
    #[serde(default)]
    pub policy: SelectionPolicy,
    #[serde(default)]
    pub d_mode: MemoryMode,
    /// Studentize with the realized weights.
    #[serde(default)]
    pub complete: bool,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub max_seconds: Option<f64>,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: ProcessSpec,
    #[serde(default)]
    pub weights: Option<WeightScheme>,
    pub experiment: RunSettings,
    #[serde(default)]
    pub bootstrap: BootstrapSettings,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.process.validate().map_err(|e| Error::Config(e.to_string()))?;
        let e = &self.experiment;
        if e.replications < MIN_REPLICATIONS {
            return bad(format!(
                "replications must be at least {MIN_REPLICATIONS}, got {}",
                e.replications
            ));
        }
        if e.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if e.n < 4 {
            return bad(format!("n must be at least 4, got {}", e.n));
        }
        if !(e.alpha > 0.0 && e.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", e.alpha));
        }
        if e.q == Some(0) || e.q.is_some_and(|q| q >= e.n) {
            return bad("q must lie in [1, n)".into());
        }
        if e.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if e.methods.contains(&CiMethod::Randomized) {
            match &self.weights {
                None => return bad("randomized intervals need a [weights] section".into()),
                Some(w) => w.validate().map_err(|err| Error::Config(err.to_string()))?,
            }
        }
        let needs_boot = e
            .methods
            .iter()
            .any(|m| matches!(m, CiMethod::Sieve | CiMethod::AugSieve | CiMethod::Block));
        if needs_boot && self.bootstrap.b < 100 {
            return bad("bootstrap b must be at least 100".into());
        }
        Ok(())
    }
}
