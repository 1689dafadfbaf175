use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use randpivot::ci::{classical_ci, randomized_ci, CiMethod, RandomizedCiParams, CSV_HEADER};
use randpivot::harness::{
    coverage_experiment, edgeworth_error_experiment, presets, write_reports, ErrorCurveConfig, ExperimentConfig,
    NamedTheta, ThetaMode,
};
use randpivot::linproc::{plugin_moments, simulate, Series};
use randpivot::rng::{stream, SeedRecord, StreamRole};
use randpivot::studentize::{bandwidth, estimate_memory};
use randpivot::weights::{gen_weights, read_weights_csv, write_weights_csv};
use randpivot::window::{cubic_coefficients, model_cubic_coefficients, solve_window_constant};
use randpivot::{Error, Result};

/// Randomized confidence intervals for the mean of linear processes.
#[derive(Parser)]
#[command(name = "randpivot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one series (and its weights) from a config's process and run settings.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        replication: u64,
        /// Series CSV (`x` column); stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write the matching weights (`w` column).
        #[arg(long)]
        weights_out: Option<PathBuf>,
    },
    /// Solve for the window constant and print it with the cubic's roots as JSON.
    Window {
        #[arg(long)]
        config: PathBuf,
        /// Use plug-in moments from this series instead of the model.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Intervals for the mean of a series in CSV.
    Ci {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Weights CSV; drawn from the configured scheme and seed when absent.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Coverage experiment; defaults to the first Table 1 row when no config is given.
    Coverage {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Sup-distance of the pivots to the normal over an n grid.
    Edgeworth {
        #[arg(long)]
        config: PathBuf,
        /// Plot-ready CSV; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a table preset.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        k: u8,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Overrides {
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// `model`, `plug_in`, or a number.
    #[arg(long)]
    theta: Option<String>,
    /// Bootstrap resamples.
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    max_seconds: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        let e = &mut cfg.experiment;
        if let Some(r) = self.replications {
            e.replications = r;
        }
        if let Some(s) = self.seed {
            e.seed = s;
        }
        if self.threads.is_some() {
            e.threads = self.threads;
        }
        if let Some(t) = &self.theta {
            e.theta = t.parse()?;
        }
        if let Some(b) = self.b {
            cfg.bootstrap.b = b;
        }
        if self.max_seconds.is_some() {
            e.max_seconds = self.max_seconds;
        }
        cfg.validate()
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(&read_text(path)?)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn d_for(cfg: &ExperimentConfig, x: &[f64]) -> Result<f64> {
    match cfg.experiment.d_mode {
        randpivot::harness::MemoryMode::Known => Ok(cfg.process.memory_parameter()),
        randpivot::harness::MemoryMode::Estimated => Ok(estimate_memory(x)?.d_hat),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            replication,
            out,
            weights_out,
        } => {
            let cfg = load_config(&config)?;
            let e = &cfg.experiment;
            let series = simulate(
                &cfg.process,
                e.n,
                SeedRecord::new(e.seed, replication, StreamRole::Data),
            )?;
            series.write_csv(sink(&out)?)?;
            if let (Some(path), Some(scheme)) = (weights_out, &cfg.weights) {
                let w = gen_weights(scheme, e.n, &mut stream(e.seed, replication, StreamRole::Weights))?;
                write_weights_csv(File::create(path)?, &w)?;
            }
        }
        Command::Window { config, data } => {
            let cfg = load_config(&config)?;
            let scheme = cfg
                .weights
                .as_ref()
                .ok_or_else(|| Error::Config("window needs a [weights] section".into()))?;
            let e = &cfg.experiment;
            let policy = match e.theta {
                ThetaMode::Fixed(t) => randpivot::window::SelectionPolicy::Fixed(t),
                _ => e.policy,
            };
            let solution = match data {
                None => {
                    let coeffs = model_cubic_coefficients(&cfg.process, scheme, e.n)?;
                    solve_window_constant(&coeffs, scheme, e.n, policy)?
                }
                Some(path) => {
                    let x = Series::read_csv(open(&path)?)?.values;
                    let q =
                        e.q.unwrap_or_else(|| bandwidth(x.len(), cfg.process.memory_parameter(), e.q_rule));
                    let coeffs = cubic_coefficients(&plugin_moments(&x, q, q)?, scheme, x.len())?;
                    solve_window_constant(&coeffs, scheme, x.len(), policy)?
                }
            };
            println!("{}", solution.to_json());
        }
        Command::Ci {
            config,
            data,
            weights,
            out,
        } => {
            let cfg = load_config(&config)?;
            let e = &cfg.experiment;
            let x = Series::read_csv(open(&data)?)?.values;
            let n = x.len();
            let d = d_for(&cfg, &x)?;
            let q = e.q.unwrap_or_else(|| bandwidth(n, d, e.q_rule));
            let mut writer = csv::Writer::from_writer(sink(&out)?);
            writer.write_record(CSV_HEADER)?;
            for method in &e.methods {
                let interval = match method {
                    CiMethod::Randomized => {
                        let scheme = cfg.weights.as_ref().expect("validated");
                        let w = match &weights {
                            Some(p) => read_weights_csv(open(p)?)?,
                            None => gen_weights(scheme, n, &mut stream(e.seed, 0, StreamRole::Weights))?,
                        };
                        let theta = match e.theta {
                            ThetaMode::Fixed(t) => t,
                            ThetaMode::Named(NamedTheta::Model) => {
                                let coeffs = model_cubic_coefficients(&cfg.process, scheme, n)?;
                                solve_window_constant(&coeffs, scheme, n, e.policy)?.selected
                            }
                            ThetaMode::Named(NamedTheta::PlugIn) => {
                                let coeffs = cubic_coefficients(&plugin_moments(&x, q, q)?, scheme, n)?;
                                solve_window_constant(&coeffs, scheme, n, e.policy)?.selected
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
                        randomized_ci(&x, &w, &p)?
                    }
                    CiMethod::Classical => classical_ci(&x, e.alpha, d, q)?,
                    other => {
                        eprintln!("skipping {other}: bootstrap intervals are available through `coverage`");
                        continue;
                    }
                };
                writer.write_record(interval.csv_record(cfg.process.mu))?;
            }
            writer.flush()?;
        }
        Command::Coverage { config, overrides, out } => {
            let mut cfg = match config {
                Some(p) => load_config(&p)?,
                None => presets::table(1, 0)?.remove(0),
            };
            overrides.apply(&mut cfg)?;
            let report = coverage_experiment(&cfg)?;
            eprintln!("finished in {:.1}s", report.wall_seconds);
            write_reports(sink(&out)?, &[report])?;
        }
        Command::Edgeworth { config, out } => {
            let cfg = ErrorCurveConfig::from_toml(&read_text(&config)?)?;
            let curve = edgeworth_error_experiment(&cfg)?;
            eprintln!(
                "log-log slopes: classical {:.3}, randomized {:.3}",
                curve.classical_slope, curve.randomized_slope
            );
            curve.write_csv(sink(&out)?)?;
        }
        Command::Table { k, overrides, out } => {
            let mut reports = Vec::new();
            for mut cfg in presets::table(k, overrides.seed.unwrap_or(0))? {
                overrides.apply(&mut cfg)?;
                let r = coverage_experiment(&cfg)?;
                eprintln!("n = {}: {:.1}s", cfg.experiment.n, r.wall_seconds);
                reports.push(r);
            }
            write_reports(sink(&out)?, &reports)?;
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::RuntimeBudget(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
