//! Acceptance suite. Each criterion prints one PASS or FAIL line; the process
//! exits non-zero when any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use randpivot::ci::{randomized_ci, CiMethod, RandomizedCiParams};
use randpivot::harness::{
    coverage_experiment, edgeworth_error_experiment, presets, reports_to_string, CoverageReport, ErrorCurveConfig,
    ErrorRunSettings, ExperimentConfig, MemoryMode, NamedTheta, ThetaMode,
};
use randpivot::linproc::{theoretical_moments, Innovation, ProcessSpec, Simulator};
use randpivot::normal::{ks_distance, mean_se, z_two_sided};
use randpivot::pivot::{
    classical_variance, conditional_variance, pivot_classical, pivot_randomized, randomized_variance,
};
use randpivot::rng::{stream, substream, StreamRole};
use randpivot::studentize::{estimate_memory, studentized_randomized, StudentizeParams};
use randpivot::weights::{gen_weights, WeightScheme};
use randpivot::window::{model_cubic_coefficients, solve_window_constant, SelectionPolicy};

const SEED: u64 = 20240501;

/// Collects check outcomes for one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn within(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.check(
            (value - target).abs() <= tol,
            format!("{label} = {value:.4} (target {target} +/- {tol})"),
        );
    }

    fn within_rel(&mut self, label: &str, value: f64, target: f64, rel: f64) {
        self.check(
            (value / target - 1.0).abs() <= rel,
            format!("{label} = {value:.4} (target {target} +/- {:.0}%)", 100.0 * rel),
        );
    }
}

fn ar1_lognormal() -> ProcessSpec {
    ProcessSpec::ar1(0.8, Innovation::StdLognormal)
}

fn model_root(spec: &ProcessSpec, scheme: &WeightScheme, n: usize) -> f64 {
    let c = model_cubic_coefficients(spec, scheme, n).unwrap();
    solve_window_constant(&c, scheme, n, SelectionPolicy::MaxDistance)
        .unwrap()
        .selected
}

fn run_table(k: u8) -> (Vec<CoverageReport>, f64) {
    let start = Instant::now();
    let reports = presets::table(k, SEED)
        .unwrap()
        .iter()
        .map(|cfg| coverage_experiment(cfg).unwrap())
        .collect();
    (reports, start.elapsed().as_secs_f64())
}

fn coverage(r: &CoverageReport, m: CiMethod) -> f64 {
    r.row(m).unwrap().coverage
}

fn table1(c: &mut Checks) {
    let (reports, secs) = run_table(1);
    for (r, (rand_cov, class_cov, len)) in reports.iter().zip([(0.9155, 0.8615, 1.81), (0.9365, 0.8865, 1.68)]) {
        let n = r.config.experiment.n;
        c.within(
            &format!("n={n} randomized coverage"),
            coverage(r, CiMethod::Randomized),
            rand_cov,
            0.03,
        );
        c.within(
            &format!("n={n} classical coverage"),
            coverage(r, CiMethod::Classical),
            class_cov,
            0.03,
        );
        c.within_rel(
            &format!("n={n} randomized mean length"),
            r.row(CiMethod::Randomized).unwrap().mean_length,
            len,
            0.2,
        );
    }
    c.check(secs < 300.0, format!("runtime {secs:.1}s < 300s"));
}

fn table2(c: &mut Checks) {
    let (reports, _) = run_table(2);
    for (r, target) in reports.iter().zip([0.912, 0.942]) {
        let n = r.config.experiment.n;
        c.within(
            &format!("n={n} randomized coverage"),
            coverage(r, CiMethod::Randomized),
            target,
            0.03,
        );
    }
}

fn table3(c: &mut Checks) {
    let (reports, secs) = run_table(3);
    let targets = [
        [
            (CiMethod::Randomized, 0.935, 0.03),
            (CiMethod::Classical, 0.8525, 0.03),
            (CiMethod::Block, 0.803, 0.06),
            (CiMethod::AugSieve, 0.710, 0.06),
            (CiMethod::Sieve, 0.3795, 0.06),
        ],
        [
            (CiMethod::Randomized, 0.9445, 0.03),
            (CiMethod::Classical, 0.864, 0.03),
            (CiMethod::Block, 0.823, 0.06),
            (CiMethod::AugSieve, 0.739, 0.06),
            (CiMethod::Sieve, 0.4035, 0.06),
        ],
    ];
    for (r, row) in reports.iter().zip(targets) {
        let n = r.config.experiment.n;
        for (m, target, tol) in row {
            c.within(&format!("n={n} {m} coverage"), coverage(r, m), target, tol);
        }
    }
    c.check(secs < 1800.0, format!("runtime {secs:.1}s < 1800s"));
}

fn window_oracle(c: &mut Checks) {
    let spec = ar1_lognormal();
    let reps = 200_000u64;
    for n in [20usize, 50] {
        let sim = Simulator::new(&spec, n).unwrap();
        for (si, scheme) in [WeightScheme::IidBernoulli { p: 0.25 }, WeightScheme::SymMultinomial]
            .iter()
            .enumerate()
        {
            let coeffs = model_cubic_coefficients(&spec, scheme, n).unwrap();
            let thetas = [0.0, 0.5, 1.0, 2.0];
            let mut samples = vec![Vec::with_capacity(reps as usize); thetas.len()];
            for r in 0..reps {
                let x = sim.draw(&mut substream(SEED, r, StreamRole::Data, si as u64));
                let w = gen_weights(scheme, n, &mut substream(SEED, r, StreamRole::Weights, si as u64)).unwrap();
                for (k, t) in thetas.iter().enumerate() {
                    let s: f64 = x.iter().zip(&w).map(|(v, wi)| (wi - t) * v).sum();
                    samples[k].push(s.powi(3) / n as f64);
                }
            }
            for (k, t) in thetas.iter().enumerate() {
                let (m, se) = mean_se(&samples[k]);
                let h = coeffs.eval(*t);
                let z = (m - h) / se;
                c.check(
                    z.abs() <= 4.0,
                    format!("n={n} {scheme:?} theta={t}: H={h:.4}, MC={m:.4}, {z:+.2} SE"),
                );
            }
        }
    }
    let white = ProcessSpec::white(Innovation::StdLognormal);
    let root = model_root(&white, &WeightScheme::IidBernoulli { p: 0.25 }, 200);
    let exact = 1.0 / (1.0 + 3f64.cbrt());
    c.check(
        (root - exact).abs() < 1e-6,
        format!("white-noise root {root:.10} vs {exact:.10}"),
    );
}

fn skewness_kill(c: &mut Checks) {
    let spec = ar1_lognormal();
    let scheme = WeightScheme::IidBernoulli { p: 0.25 };
    let n = 100;
    let reps = 1_000_000u64;
    let theta = model_root(&spec, &scheme, n);
    let gamma = theoretical_moments(&spec, n - 1, 0, None).unwrap().gamma;
    let var_sum = classical_variance(&gamma, n).unwrap();
    let sim = Simulator::new(&spec, n).unwrap();
    let mut rand3 = Vec::with_capacity(reps as usize);
    let mut class3 = Vec::with_capacity(reps as usize);
    for r in 0..reps {
        let x = sim.draw(&mut stream(SEED, r, StreamRole::Data));
        let w = gen_weights(&scheme, n, &mut stream(SEED, r, StreamRole::Weights)).unwrap();
        rand3.push(
            pivot_randomized(&x, &w, theta, 0.0, &scheme, &gamma)
                .unwrap()
                .value
                .powi(3),
        );
        class3.push(pivot_classical(&x, 0.0, var_sum).unwrap().value.powi(3));
    }
    let (m, se) = mean_se(&rand3);
    c.check(
        (m / se).abs() <= 4.0,
        format!("randomized E T^3 = {m:.5} ({:+.2} SE) at theta {theta:.4}", m / se),
    );
    let (m, se) = mean_se(&class3);
    c.check(
        (m / se).abs() > 10.0,
        format!("classical E T^3 = {m:.5} ({:+.1} SE)", m / se),
    );
}

fn edgeworth_rate(c: &mut Checks) {
    let cfg = ErrorCurveConfig {
        process: ar1_lognormal(),
        weights: WeightScheme::IidBernoulli { p: 0.25 },
        edgeworth: ErrorRunSettings {
            grid: vec![100, 400, 1600],
            replications: 400_000,
            seed: SEED,
            threads: None,
            require_fifth_moment: true,
            policy: SelectionPolicy::MaxDistance,
        },
    };
    let curve = edgeworth_error_experiment(&cfg).unwrap();
    c.within("classical log-log slope", curve.classical_slope, -0.5, 0.2);
    for i in 0..curve.grid.len() {
        c.check(
            curve.randomized[i] < curve.classical[i],
            format!(
                "n={}: randomized {:.4} < classical {:.4}",
                curve.grid[i], curve.randomized[i], curve.classical[i]
            ),
        );
    }
}

fn clt_distance(spec: &ProcessSpec, scheme: &WeightScheme, theta: f64, q: usize, reps: u64, estimate_d: bool) -> f64 {
    let n = 5000;
    let sim = Simulator::new(spec, n).unwrap();
    let g: Vec<f64> = (0..reps)
        .filter_map(|r| {
            let x = sim.draw(&mut stream(SEED, r, StreamRole::Data));
            let w = gen_weights(scheme, n, &mut stream(SEED, r, StreamRole::Weights)).unwrap();
            let d = if estimate_d {
                estimate_memory(&x).ok()?.d_hat
            } else {
                spec.memory_parameter()
            };
            let p = StudentizeParams {
                scheme,
                theta,
                d,
                q,
                complete: false,
            };
            studentized_randomized(&x, &w, spec.mu, &p).ok().map(|s| s.value)
        })
        .collect();
    ks_distance(&g)
}

fn clt_and_ratios(c: &mut Checks) {
    let n = 5000usize;
    let q = (n as f64).cbrt().ceil() as usize;
    let bern = WeightScheme::IidBernoulli { p: 0.25 };
    let short = ar1_lognormal();
    let ks = clt_distance(&short, &bern, model_root(&short, &bern, n), q, 10_000, false);
    c.check(ks < 0.025, format!("short memory sup-distance {ks:.4} < 0.025"));
    let fid = ProcessSpec::fid(0.4, Innovation::StdLognormal);
    let mult = WeightScheme::SymMultinomial;
    for estimate in [false, true] {
        let ks = clt_distance(&fid, &mult, 1.97, q, 2000, estimate);
        let label = if estimate { "estimated d" } else { "known d" };
        c.check(ks < 0.04, format!("long memory ({label}) sup-distance {ks:.4} < 0.04"));
    }

    // Ratio trends over weight draws for AR(1) with Bernoulli weights.
    let mut med_ratio = Vec::new();
    let mut med_max = Vec::new();
    let mut p99_sq = Vec::new();
    for (gi, n) in [100usize, 1000, 10_000].into_iter().enumerate() {
        let theta = model_root(&short, &bern, n);
        let cap = (n - 1).min(short.default_truncation(n));
        let gamma = theoretical_moments(&short, cap, 0, None).unwrap().gamma;
        let nd = randomized_variance(&bern, theta, &gamma, n).unwrap();
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        let mut r3 = Vec::new();
        for r in 0..200u64 {
            let w = gen_weights(&bern, n, &mut substream(SEED, r, StreamRole::Weights, gi as u64)).unwrap();
            r1.push((conditional_variance(&w, theta, &gamma) / nd - 1.0).abs());
            r2.push(w.iter().map(|v| (v - theta).abs()).fold(0.0, f64::max) / nd.sqrt());
            r3.push(w.iter().map(|v| (v - theta).powi(2)).sum::<f64>() / nd);
        }
        for v in [&mut r1, &mut r2, &mut r3] {
            v.sort_by(f64::total_cmp);
        }
        med_ratio.push(r1[100]);
        med_max.push(r2[100]);
        p99_sq.push(r3[197]);
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|p| p[1] < p[0]);
    c.check(
        decreasing(&med_ratio),
        format!("median |R/nD - 1| decreasing: {med_ratio:.4?}"),
    );
    c.check(
        decreasing(&med_max),
        format!("median max|w - theta|/sqrt(nD) decreasing: {med_max:.4?}"),
    );
    c.check(
        p99_sq.iter().all(|v| *v < 1.0),
        format!("99th percentile of sum (w - theta)^2/nD below 1: {p99_sq:.4?}"),
    );
}

fn identities(c: &mut Checks) {
    let cases = [
        (ar1_lognormal(), WeightScheme::IidBernoulli { p: 0.25 }, 0.39, 0.0),
        (
            ProcessSpec::fid(0.4, Innovation::StdLognormal),
            WeightScheme::SymMultinomial,
            1.97,
            0.4,
        ),
        (
            ProcessSpec::ar1(-0.5, Innovation::StdNormal),
            WeightScheme::exponential(1.0),
            0.3,
            0.0,
        ),
    ];
    let z = z_two_sided(0.05);
    let (mut bridge, mut cover, mut point) = (0.0f64, 0usize, 0.0f64);
    let mut total = 0usize;
    for (ci, (spec, scheme, theta, d)) in cases.iter().enumerate() {
        for n in [60usize, 257] {
            let sim = Simulator::new(spec, n).unwrap();
            let gamma = theoretical_moments(spec, n - 1, 0, None).unwrap().gamma;
            for r in 0..300u64 {
                let key = (ci * 1000 + n) as u64;
                let x = sim.draw(&mut substream(SEED, r, StreamRole::Data, key));
                let w = gen_weights(scheme, n, &mut substream(SEED, r, StreamRole::Weights, key)).unwrap();
                let mu = 0.3 * spec.mu;
                let q = 1 + (r as usize % 9);
                let p = StudentizeParams {
                    scheme,
                    theta: *theta,
                    d: *d,
                    q,
                    complete: r % 2 == 0,
                };
                let Ok(g) = studentized_randomized(&x, &w, mu, &p) else {
                    continue;
                };
                let t = pivot_randomized(&x, &w, *theta, mu, scheme, &gamma).unwrap();
                let nf = n as f64;
                let via_t = t.value * (t.normalizer / (nf.powf(1.0 + 2.0 * d) * g.hac.value)).sqrt();
                bridge = bridge.max((via_t - g.value).abs() / g.value.abs().max(1.0));

                let cp = RandomizedCiParams {
                    scheme,
                    theta: *theta,
                    alpha: 0.05,
                    d: *d,
                    q,
                    complete: p.complete,
                };
                let interval = randomized_ci(&x, &w, &cp).unwrap();
                total += 1;
                if interval.covers(mu) != (g.value.abs() <= z) {
                    cover += 1;
                }

                let cw = vec![1.7; n];
                let pm = WeightScheme::point_mass(1.7);
                let pi = randomized_ci(&x, &cw, &RandomizedCiParams { scheme: &pm, ..cp }).unwrap();
                let xbar = x.iter().sum::<f64>() / nf;
                point = point.max((0.5 * (pi.lo + pi.hi) - xbar).abs() / xbar.abs().max(1.0));
                let var_sum = classical_variance(&gamma, n).unwrap();
                let tc = pivot_classical(&x, mu, var_sum).unwrap().value;
                let tp = pivot_randomized(&x, &cw, *theta, mu, &pm, &gamma).unwrap().value;
                point = point.max((tp - tc * (1.7 - theta).signum()).abs() / tc.abs().max(1.0));
            }
        }
    }
    c.check(
        bridge < 1e-10,
        format!("bridge identity max relative error {bridge:.2e}"),
    );
    c.check(
        cover == 0,
        format!("coverage equivalence mismatches: {cover} of {total}"),
    );
    c.check(
        point < 1e-10,
        format!("point-mass reductions max relative error {point:.2e}"),
    );
}

fn determinism(c: &mut Checks) {
    let mut cfgs: Vec<ExperimentConfig> = presets::table(3, SEED).unwrap();
    let mut cfg = cfgs.remove(0);
    cfg.experiment.replications = 120;
    cfg.bootstrap.b = 200;
    cfg.experiment.theta = ThetaMode::Named(NamedTheta::PlugIn);
    cfg.experiment.d_mode = MemoryMode::Estimated;
    let mut outputs = Vec::new();
    for threads in [1usize, 3, 8] {
        cfg.experiment.threads = Some(threads);
        outputs.push(reports_to_string(&[coverage_experiment(&cfg).unwrap()]).unwrap());
    }
    c.check(
        outputs.windows(2).all(|p| p[0] == p[1]),
        "CSV identical for 1, 3 and 8 threads".into(),
    );
    let mut t1 = presets::table(1, SEED).unwrap().remove(1);
    t1.experiment.replications = 300;
    let a = reports_to_string(&[coverage_experiment(&t1).unwrap()]).unwrap();
    t1.experiment.threads = Some(5);
    let b = reports_to_string(&[coverage_experiment(&t1).unwrap()]).unwrap();
    c.check(a == b, "Table 1 row CSV identical across thread counts".into());
}

type Criterion = (&'static str, fn(&mut Checks));

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 table 1 reproduction", table1),
        ("2 table 2 reproduction", table2),
        ("3 table 3 reproduction", table3),
        ("4 window-solver oracle", window_oracle),
        ("5 skewness removal", skewness_kill),
        ("6 error-rate property", edgeworth_rate),
        ("7 CLT and ratio trends", clt_and_ratios),
        ("8 exact identities", identities),
        ("9 determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut checks = Checks::default();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| f(&mut checks)));
        let secs = start.elapsed().as_secs_f64();
        if let Err(e) = outcome {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            checks.failures.push(format!("panicked: {msg}"));
        }
        for note in &checks.notes {
            println!("    ok   {note}");
        }
        for f in &checks.failures {
            println!("    miss {f}");
        }
        if checks.failures.is_empty() {
            println!("PASS criterion {name} ({secs:.1}s)");
        } else {
            failed += 1;
            println!("FAIL criterion {name} ({secs:.1}s)");
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
