//! Linear processes `X_t = mu + sum_k a_k zeta_{t-k}`: simulation, MA
//! coefficients, and model or sample moment structure up to third order.

use std::io::{Read, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::rng::{SeedRecord, SimRng};
use crate::{Error, Result};

/// Relative tail of `gamma_0` above which model moments are flagged as truncated.
pub const TRUNCATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    Ar1 { phi: f64 },
    Fid { d: f64 },
    MaFinite { coeffs: Vec<f64> },
    White,
}

/// Innovation law, always standardized to mean 0 and variance 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "innovation", rename_all = "snake_case")]
pub enum Innovation {
    StdLognormal,
    StdNormal,
    /// Moments only; usable for model moments but not for simulation.
    Custom {
        mu2: f64,
        mu3: f64,
        mu4: f64,
    },
}

impl Innovation {
    pub fn mu3(&self) -> f64 {
        match self {
            Innovation::StdLognormal => {
                let e = std::f64::consts::E;
                (e + 2.0) * (e - 1.0).sqrt()
            }
            Innovation::StdNormal => 0.0,
            Innovation::Custom { mu3, .. } => *mu3,
        }
    }

    pub fn mu4(&self) -> f64 {
        match self {
            Innovation::StdLognormal => {
                let e = std::f64::consts::E;
                e.powi(4) + 2.0 * e.powi(3) + 3.0 * e * e - 3.0
            }
            Innovation::StdNormal => 3.0,
            Innovation::Custom { mu4, .. } => *mu4,
        }
    }

    fn draw(&self, rng: &mut SimRng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        match self {
            Innovation::StdNormal => z,
            Innovation::StdLognormal => {
                let e = std::f64::consts::E;
                (z.exp() - e.sqrt()) / (e * e - e).sqrt()
            }
            Innovation::Custom { .. } => unreachable!("validated before sampling"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    #[serde(flatten)]
    pub innovation: Innovation,
    #[serde(default)]
    pub mu: f64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, innovation: Innovation, mu: f64) -> Self {
        Self { kind, innovation, mu }
    }

    pub fn ar1(phi: f64, innovation: Innovation) -> Self {
        Self::new(ProcessKind::Ar1 { phi }, innovation, 0.0)
    }

    pub fn fid(d: f64, innovation: Innovation) -> Self {
        Self::new(ProcessKind::Fid { d }, innovation, 0.0)
    }

    pub fn white(innovation: Innovation) -> Self {
        Self::new(ProcessKind::White, innovation, 0.0)
    }

    /// Memory parameter; zero for every short-memory kind.
    pub fn memory_parameter(&self) -> f64 {
        match self.kind {
            ProcessKind::Fid { d } => d,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ProcessKind::Ar1 { phi } if !(phi.abs() < 1.0) => {
                return Err(Error::ParameterDomain(format!("AR(1) needs |phi| < 1, got {phi}")))
            }
            ProcessKind::Fid { d } if !(*d > 0.0 && *d < 0.5) => {
                return Err(Error::ParameterDomain(format!("FID needs 0 < d < 1/2, got {d}")))
            }
            ProcessKind::MaFinite { coeffs } if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) => {
                return Err(Error::ParameterDomain(
                    "MA coefficients must be finite and non-empty".into(),
                ))
            }
            _ => {}
        }
        if let Innovation::Custom { mu2, mu3, mu4 } = self.innovation {
            if (mu2 - 1.0).abs() > 1e-12 {
                return Err(Error::ParameterDomain(format!(
                    "innovation variance must be 1, got {mu2}"
                )));
            }
            if !mu3.is_finite() || !(mu4 >= 1.0 + mu3 * mu3 - 1e-12) {
                return Err(Error::ParameterDomain(
                    "custom innovation moments are inconsistent".into(),
                ));
            }
        }
        if !self.mu.is_finite() {
            return Err(Error::ParameterDomain("process mean must be finite".into()));
        }
        Ok(())
    }

    /// Number of MA terms used both for simulation and for model moments.
    pub fn default_truncation(&self, n: usize) -> usize {
        match &self.kind {
            ProcessKind::Ar1 { phi } => {
                if *phi == 0.0 {
                    1
                } else {
                    ((1e-17f64).ln() / phi.abs().ln()).ceil() as usize + 1
                }
            }
            ProcessKind::Fid { .. } => (10 * n).max(10_000),
            ProcessKind::MaFinite { coeffs } => coeffs.len(),
            ProcessKind::White => 1,
        }
    }

    /// Exact `gamma_0` of the untruncated process, when available in closed form.
    pub fn exact_variance(&self) -> f64 {
        match &self.kind {
            ProcessKind::Ar1 { phi } => 1.0 / (1.0 - phi * phi),
            ProcessKind::Fid { d } => (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp(),
            ProcessKind::MaFinite { coeffs } => coeffs.iter().map(|c| c * c).sum(),
            ProcessKind::White => 1.0,
        }
    }
}

/// MA coefficients `a_0..a_{k-1}`.
pub fn ma_coefficients(spec: &ProcessSpec, k: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    if k == 0 {
        return Err(Error::ParameterDomain("need at least one MA coefficient".into()));
    }
    let mut a = vec![0.0; k];
    match &spec.kind {
        ProcessKind::Ar1 { phi } => {
            a[0] = 1.0;
            for j in 1..k {
                a[j] = a[j - 1] * phi;
            }
        }
        ProcessKind::Fid { d } => {
            a[0] = 1.0;
            for j in 1..k {
                a[j] = a[j - 1] * (j as f64 - 1.0 + d) / j as f64;
            }
        }
        ProcessKind::MaFinite { coeffs } => {
            for (dst, src) in a.iter_mut().zip(coeffs) {
                *dst = *src;
            }
        }
        ProcessKind::White => a[0] = 1.0,
    }
    Ok(a)
}

/// Observed series with optional provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub values: Vec<f64>,
    pub spec: Option<ProcessSpec>,
    pub seed: Option<SeedRecord>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::ParameterDomain("a series needs at least 2 values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::ParameterDomain("series values must be finite".into()));
        }
        Ok(Self {
            values,
            spec: None,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_column(w, "x", &self.values)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        Self::new(read_column(r, "x")?)
    }
}

pub(crate) fn write_column<W: Write>(w: W, header: &str, values: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([header])?;
    for v in values {
        out.write_record([format!("{v:e}")])?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn read_column<R: Read>(r: R, header: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.len() != 1 || &headers[0] != header {
        return Err(Error::Config(format!("expected single CSV column `{header}`")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let v: f64 = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("not a number: {}", &rec[0])))?;
        out.push(v);
    }
    Ok(out)
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

const FFT_WORK_THRESHOLD: usize = 1 << 20;

enum Engine {
    Ar1 {
        phi: f64,
        burn: usize,
    },
    Direct {
        coeffs: Vec<f64>,
    },
    Fft {
        k: usize,
        size: usize,
        coeff_spectrum: Vec<Complex<f64>>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    White,
}

/// Reusable generator for one `(spec, n)` pair. Building it once amortizes
/// the coefficient transform across replications.
pub struct Simulator {
    spec: ProcessSpec,
    n: usize,
    engine: Engine,
}

impl Simulator {
    pub fn new(spec: &ProcessSpec, n: usize) -> Result<Self> {
        spec.validate()?;
        if n < 2 {
            return Err(Error::ParameterDomain("n must be at least 2".into()));
        }
        if matches!(spec.innovation, Innovation::Custom { .. }) {
            return Err(Error::ParameterDomain(
                "custom innovations carry moments only and cannot be simulated".into(),
            ));
        }
        let engine = match &spec.kind {
            ProcessKind::Ar1 { phi } => Engine::Ar1 {
                phi: *phi,
                burn: 1000 + (10.0 / (1.0 - phi.abs())).ceil() as usize,
            },
            ProcessKind::White => Engine::White,
            ProcessKind::MaFinite { coeffs } => Engine::Direct { coeffs: coeffs.clone() },
            ProcessKind::Fid { .. } => {
                let k = spec.default_truncation(n);
                let coeffs = ma_coefficients(spec, k)?;
                if n * k > FFT_WORK_THRESHOLD {
                    let size = (n + k).next_power_of_two();
                    let mut planner = FftPlanner::new();
                    let forward = planner.plan_fft_forward(size);
                    let inverse = planner.plan_fft_inverse(size);
                    let mut coeff_spectrum: Vec<Complex<f64>> = coeffs
                        .iter()
                        .map(|&a| Complex::new(a, 0.0))
                        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
                        .take(size)
                        .collect();
                    forward.process(&mut coeff_spectrum);
                    Engine::Fft {
                        k,
                        size,
                        coeff_spectrum,
                        forward,
                        inverse,
                    }
                } else {
                    Engine::Direct { coeffs }
                }
            }
        };
        Ok(Self {
            spec: spec.clone(),
            n,
            engine,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Draws `n` values, consuming innovations from `rng`.
    pub fn draw(&self, rng: &mut SimRng) -> Vec<f64> {
        let n = self.n;
        let inn = &self.spec.innovation;
        let mut x = match &self.engine {
            Engine::White => (0..n).map(|_| inn.draw(rng)).collect::<Vec<_>>(),
            Engine::Ar1 { phi, burn } => {
                let mut state = 0.0;
                for _ in 0..*burn {
                    state = phi * state + inn.draw(rng);
                }
                (0..n)
                    .map(|_| {
                        state = phi * state + inn.draw(rng);
                        state
                    })
                    .collect()
            }
            Engine::Direct { coeffs } => {
                let k = coeffs.len();
                let z: Vec<f64> = (0..n + k - 1).map(|_| inn.draw(rng)).collect();
                (0..n)
                    .map(|t| {
                        let top = t + k - 1;
                        coeffs.iter().enumerate().map(|(j, a)| a * z[top - j]).sum()
                    })
                    .collect()
            }
            Engine::Fft {
                k,
                size,
                coeff_spectrum,
                forward,
                inverse,
            } => {
                let mut buf: Vec<Complex<f64>> = (0..n + k - 1)
                    .map(|_| Complex::new(inn.draw(rng), 0.0))
                    .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
                    .take(*size)
                    .collect();
                forward.process(&mut buf);
                for (b, c) in buf.iter_mut().zip(coeff_spectrum) {
                    *b *= c;
                }
                inverse.process(&mut buf);
                let scale = 1.0 / *size as f64;
                buf[k - 1..k - 1 + n].iter().map(|c| c.re * scale).collect()
            }
        };
        if self.spec.mu != 0.0 {
            x.iter_mut().for_each(|v| *v += self.spec.mu);
        }
        x
    }
}

pub fn simulate(spec: &ProcessSpec, n: usize, seed: SeedRecord) -> Result<Series> {
    let sim = Simulator::new(spec, n)?;
    let mut rng = seed.rng();
    Ok(Series {
        values: sim.draw(&mut rng),
        spec: Some(spec.clone()),
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    Model,
    PlugIn { lag_cap: usize },
}

/// Third-order moments of the centered process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThirdOrder {
    /// `E X_1^3`.
    pub single: f64,
    /// `pair[h-1] = (E X_1^2 X_{1+h}, E X_1 X_{1+h}^2)` for `h = 1..=lag_cap`.
    pub pair: Vec<(f64, f64)>,
    /// `triple[h-1][h2-1] = E X_1 X_{1+h} X_{1+h+h2}` for `h, h2 >= 1`, `h + h2 <= lag_cap`.
    pub triple: Vec<Vec<f64>>,
    pub lag_cap: usize,
}

/// Lag-weighted third-order sums entering the cubic skewness functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdOrderSums {
    pub single: f64,
    pub pair: f64,
    pub triple: f64,
}

impl ThirdOrder {
    /// Sums with triangular weights `1 - h/n`, over the lags the map covers.
    pub fn sums(&self, n: usize) -> ThirdOrderSums {
        let nf = n as f64;
        let cap = self.lag_cap.min(n.saturating_sub(1));
        let pair = (1..=cap)
            .map(|h| {
                let (a, b) = self.pair[h - 1];
                (1.0 - h as f64 / nf) * (a + b)
            })
            .sum();
        let mut triple = 0.0;
        for h in 1..cap {
            for h2 in 1..=cap - h {
                triple += (1.0 - (h + h2) as f64 / nf) * self.triple[h - 1][h2 - 1];
            }
        }
        ThirdOrderSums {
            single: self.single,
            pair,
            triple,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentStructure {
    /// Autocovariances `gamma_0..gamma_H`.
    pub gamma: Vec<f64>,
    pub third: Option<ThirdOrder>,
    pub source: MomentSource,
    /// Relative tail of `gamma_0` lost to MA truncation (model moments only).
    pub truncation_error: f64,
    pub truncated: bool,
}

impl MomentStructure {
    /// Second-order structure without third moments, e.g. from an external estimate.
    pub fn second_order_only(gamma: Vec<f64>, source: MomentSource) -> Self {
        Self {
            gamma,
            third: None,
            source,
            truncation_error: 0.0,
            truncated: false,
        }
    }

    pub fn third(&self) -> Result<&ThirdOrder> {
        self.third
            .as_ref()
            .ok_or_else(|| Error::IncompleteMoments("third-order moments are missing".into()))
    }
}

fn truncation_error(spec: &ProcessSpec, gamma0: f64) -> f64 {
    let exact = spec.exact_variance();
    ((exact - gamma0) / exact).max(0.0)
}

/// Model moments from the MA representation truncated at `k` terms
/// (`None` uses the simulation truncation for `n = gamma_cap`).
pub fn theoretical_moments(
    spec: &ProcessSpec,
    gamma_cap: usize,
    third_cap: usize,
    k: Option<usize>,
) -> Result<MomentStructure> {
    let k = k.unwrap_or_else(|| spec.default_truncation(gamma_cap.max(2)));
    let a = ma_coefficients(spec, k)?;
    let mu3 = spec.innovation.mu3();
    let lag = |h: usize| -> f64 {
        if h >= k {
            0.0
        } else {
            a[..k - h].iter().zip(&a[h..]).map(|(x, y)| x * y).sum()
        }
    };
    let gamma: Vec<f64> = (0..=gamma_cap).map(lag).collect();
    let at = |j: usize| if j < k { a[j] } else { 0.0 };
    let third = if mu3 == 0.0 {
        ThirdOrder {
            single: 0.0,
            pair: vec![(0.0, 0.0); third_cap],
            triple: (1..third_cap).map(|h| vec![0.0; third_cap - h]).collect(),
            lag_cap: third_cap,
        }
    } else {
        let single = mu3 * a.iter().map(|x| x * x * x).sum::<f64>();
        let pair = (1..=third_cap)
            .map(|h| {
                let mut s1 = 0.0;
                let mut s2 = 0.0;
                for j in 0..k.saturating_sub(h) {
                    s1 += a[j] * a[j] * a[j + h];
                    s2 += a[j] * a[j + h] * a[j + h];
                }
                (mu3 * s1, mu3 * s2)
            })
            .collect();
        let triple = (1..third_cap)
            .map(|h| {
                (1..=third_cap - h)
                    .map(|h2| mu3 * (0..k).map(|j| a[j] * at(j + h) * at(j + h + h2)).sum::<f64>())
                    .collect()
            })
            .collect();
        ThirdOrder {
            single,
            pair,
            triple,
            lag_cap: third_cap,
        }
    };
    let err = truncation_error(spec, gamma[0]);
    Ok(MomentStructure {
        gamma,
        third: Some(third),
        source: MomentSource::Model,
        truncation_error: err,
        truncated: err > TRUNCATION_TOL,
    })
}

/// Model third-order sums over all lags `< n` in `O(n k)` via prefix sums,
/// without materializing the triple map.
pub fn model_third_order_sums(spec: &ProcessSpec, n: usize, k: Option<usize>) -> Result<ThirdOrderSums> {
    let k = k.unwrap_or_else(|| spec.default_truncation(n));
    let a = ma_coefficients(spec, k)?;
    let mu3 = spec.innovation.mu3();
    if mu3 == 0.0 {
        return Ok(ThirdOrderSums {
            single: 0.0,
            pair: 0.0,
            triple: 0.0,
        });
    }
    let nf = n as f64;
    let at = |j: usize| if j < k { a[j] } else { 0.0 };
    let mut prefix = vec![0.0; k + n + 1];
    let mut acc = 0.0;
    for (j, p) in prefix.iter_mut().enumerate() {
        acc += at(j);
        *p = acc;
    }
    let single = a.iter().map(|x| x * x * x).sum::<f64>();
    let mut pair = 0.0;
    let mut triple = 0.0;
    for j in 0..k {
        let aj = a[j];
        let mut inner_pair = 0.0;
        for h in 1..n.min(k - j) {
            let b = a[j + h];
            inner_pair += (1.0 - h as f64 / nf) * (aj * b + b * b);
        }
        pair += aj * inner_pair;
        let mut inner_triple = 0.0;
        for s in 2..n.min(k - j) {
            let b = a[j + s];
            inner_triple += (1.0 - s as f64 / nf) * b * (prefix[j + s - 1] - prefix[j]);
        }
        triple += aj * inner_triple;
    }
    Ok(ThirdOrderSums {
        single: mu3 * single,
        pair: mu3 * pair,
        triple: mu3 * triple,
    })
}

/// Sample autocovariances with divisor `n`, centered at the sample mean.
pub fn sample_autocov(x: &[f64], smax: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if smax >= n {
        return Err(Error::ParameterDomain(format!("lag cap {smax} must be below n = {n}")));
    }
    if is_constant(x) {
        return Ok(vec![0.0; smax + 1]);
    }
    let m = mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    Ok((0..=smax)
        .map(|s| c[..n - s].iter().zip(&c[s..]).map(|(u, v)| u * v).sum::<f64>() / n as f64)
        .collect())
}

/// Sample analogue of the moment structure; third moments are centered
/// products with divisor `n` up to lag `l`.
pub fn plugin_moments(x: &[f64], gamma_cap: usize, l: usize) -> Result<MomentStructure> {
    let n = x.len();
    if l > gamma_cap || gamma_cap + 2 > n {
        return Err(Error::ParameterDomain(format!(
            "plug-in lag caps need L <= H <= n - 2 (L = {l}, H = {gamma_cap}, n = {n})"
        )));
    }
    if is_constant(x) {
        return Err(Error::DegenerateData("series has zero variance".into()));
    }
    let gamma = sample_autocov(x, gamma_cap)?;
    let m = mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    let nf = n as f64;
    let single = c.iter().map(|v| v * v * v).sum::<f64>() / nf;
    let pair = (1..=l)
        .map(|h| {
            let (mut s1, mut s2) = (0.0, 0.0);
            for t in 0..n - h {
                s1 += c[t] * c[t] * c[t + h];
                s2 += c[t] * c[t + h] * c[t + h];
            }
            (s1 / nf, s2 / nf)
        })
        .collect();
    let triple = (1..l)
        .map(|h| {
            (1..=l - h)
                .map(|h2| (0..n - h - h2).map(|t| c[t] * c[t + h] * c[t + h + h2]).sum::<f64>() / nf)
                .collect()
        })
        .collect();
    Ok(MomentStructure {
        gamma,
        third: Some(ThirdOrder {
            single,
            pair,
            triple,
            lag_cap: l,
        }),
        source: MomentSource::PlugIn { lag_cap: l },
        truncation_error: 0.0,
        truncated: false,
    })
}
