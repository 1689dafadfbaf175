//! Ready-made configurations for the three simulation tables.
//!
//! Window constants default to the tabulated values; [`ThetaMode::Named`]
//! switches to model roots.

use std::collections::BTreeSet;

use super::config::{BootstrapSettings, ExperimentConfig, MemoryMode, RunSettings, ThetaMode};
use crate::ci::CiMethod;
use crate::linproc::{Innovation, ProcessSpec};
use crate::studentize::BandwidthRule;
use crate::weights::WeightScheme;
use crate::window::SelectionPolicy;
use crate::{Error, Result};

pub const REPLICATIONS: usize = 2000;
pub const RESAMPLES: usize = 1000;

/// Tabulated `(n, theta)` pairs.
pub const TABLE1: [(usize, f64); 2] = [(200, 0.39), (400, 0.35)];
pub const TABLE2: [(usize, f64); 2] = [(200, 0.73), (400, 1.23)];
pub const TABLE3: [(usize, f64); 2] = [(100, 1.97), (200, 1.97)];

fn run(n: usize, theta: f64, methods: &[CiMethod], q_rule: BandwidthRule, seed: u64) -> RunSettings {
    RunSettings {
        n,
        replications: REPLICATIONS,
        alpha: 0.05,
        methods: methods.iter().copied().collect::<BTreeSet<_>>(),
        seed,
        q_rule,
        q: None,
        theta: ThetaMode::Fixed(theta),
        policy: SelectionPolicy::MaxDistance,
        d_mode: MemoryMode::Known,
        complete: false,
        threads: None,
        max_seconds: None,
    }
}

/// One configuration per table row, `n` ascending.
pub fn table(k: u8, seed: u64) -> Result<Vec<ExperimentConfig>> {
    let basic = [CiMethod::Randomized, CiMethod::Classical];
    let (rows, process, weights, methods, rule): (_, _, _, &[CiMethod], _) = match k {
        1 => (
            TABLE1,
            ProcessSpec::ar1(0.8, Innovation::StdLognormal),
            WeightScheme::IidBernoulli { p: 0.25 },
            &basic,
            BandwidthRule::ShortMemory,
        ),
        2 => (
            TABLE2,
            ProcessSpec::ar1(0.8, Innovation::StdLognormal),
            WeightScheme::SymMultinomial,
            &basic,
            BandwidthRule::ShortMemory,
        ),
        3 => (
            TABLE3,
            ProcessSpec::fid(0.4, Innovation::StdLognormal),
            WeightScheme::SymMultinomial,
            &CiMethod::ALL,
            BandwidthRule::LongMemory,
        ),
        other => return Err(Error::Config(format!("no table {other}; choose 1, 2 or 3"))),
    };
    Ok(rows
        .iter()
        .map(|&(n, theta)| ExperimentConfig {
            process: process.clone(),
            weights: Some(weights.clone()),
            experiment: run(n, theta, methods, rule, seed),
            bootstrap: BootstrapSettings {
                b: RESAMPLES,
                ..Default::default()
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::coverage_experiment;

    #[test]
    fn presets_are_valid() {
        for k in 1..=3 {
            let rows = table(k, 1).unwrap();
            assert_eq!(rows.len(), 2);
            for cfg in &rows {
                cfg.validate().unwrap();
                let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
                assert_eq!(&again, cfg);
            }
        }
        assert_eq!(table(3, 1).unwrap()[0].experiment.methods.len(), 5);
        assert!(table(4, 1).is_err());
    }

    #[test]
    fn randomized_beats_classical_in_every_preset() {
        for k in 1..=3 {
            for cfg in table(k, 11).unwrap() {
                let r = coverage_experiment(&cfg).unwrap();
                let rand = r.row(CiMethod::Randomized).unwrap().coverage;
                let class = r.row(CiMethod::Classical).unwrap().coverage;
                assert!(rand > class, "table {k}, n = {}: {rand} vs {class}", cfg.experiment.n);
                for row in &r.rows {
                    assert!((0.0..=1.0).contains(&row.coverage));
                    assert!(row.discarded <= cfg.experiment.replications);
                }
            }
        }
    }
}
