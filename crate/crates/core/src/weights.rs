//! Randomizing weights and their exact moments.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::linproc::{read_column, write_column};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Sampler for user-supplied i.i.d. weight laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case")]
pub enum Sampler {
    PointMass {
        value: f64,
    },
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    /// `a` with probability `p`, otherwise `b`.
    TwoPoint {
        a: f64,
        b: f64,
        p: f64,
    },
}

impl Sampler {
    /// Exact raw moments `E w^j`, `j = 1..=5`.
    pub fn raw_moments(&self) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (j, o) in out.iter_mut().enumerate() {
            let k = (j + 1) as i32;
            *o = match self {
                Sampler::PointMass { value } => value.powi(k),
                Sampler::Exponential { rate } => (1..=k).product::<i32>() as f64 / rate.powi(k),
                Sampler::Gamma { shape, scale } => (0..k).map(|i| shape + i as f64).product::<f64>() * scale.powi(k),
                Sampler::TwoPoint { a, b, p } => p * a.powi(k) + (1.0 - p) * b.powi(k),
            };
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Sampler::PointMass { value } => value.is_finite(),
            Sampler::Exponential { rate } => *rate > 0.0 && rate.is_finite(),
            Sampler::Gamma { shape, scale } => *shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite(),
            Sampler::TwoPoint { a, b, p } => a.is_finite() && b.is_finite() && *p > 0.0 && *p < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterDomain(format!("invalid weight sampler {self:?}")))
        }
    }
}

/// User-supplied i.i.d. weights: exact first three moments plus a sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomWeights {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    #[serde(flatten)]
    pub sampler: Sampler,
    #[serde(default = "default_true")]
    pub fifth_moment_finite: bool,
}

fn default_true() -> bool {
    true
}

impl CustomWeights {
    /// Fills in the exact moments of a known sampler.
    pub fn from_sampler(sampler: Sampler) -> Self {
        let m = sampler.raw_moments();
        Self {
            e1: m[0],
            e2: m[1],
            e3: m[2],
            sampler,
            fifth_moment_finite: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum WeightScheme {
    IidBernoulli {
        p: f64,
    },
    IidCustom(CustomWeights),
    /// Cell counts of `Multinomial(n; 1/n, ..., 1/n)`.
    SymMultinomial,
}

/// Raw joint moments of distinct-index weight patterns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawMoments {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// `E w_1 w_2`.
    pub e11: f64,
    /// `E w_1^2 w_2`.
    pub e21: f64,
    /// `E w_1 w_2 w_3`.
    pub e111: f64,
}

impl WeightScheme {
    pub fn point_mass(value: f64) -> Self {
        WeightScheme::IidCustom(CustomWeights::from_sampler(Sampler::PointMass { value }))
    }

    pub fn exponential(rate: f64) -> Self {
        WeightScheme::IidCustom(CustomWeights::from_sampler(Sampler::Exponential { rate }))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightScheme::IidBernoulli { p } if !(*p > 0.0 && *p < 1.0) => Err(Error::ParameterDomain(format!(
                "Bernoulli weights need 0 < p < 1, got {p}"
            ))),
            WeightScheme::IidCustom(c) => {
                c.sampler.validate()?;
                if !(c.e1.is_finite() && c.e2.is_finite() && c.e3.is_finite()) || c.e2 < c.e1 * c.e1 - 1e-12 {
                    return Err(Error::ParameterDomain("custom weight moments are inconsistent".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_iid(&self) -> bool {
        !matches!(self, WeightScheme::SymMultinomial)
    }

    pub fn raw_moments(&self, n: usize) -> RawMoments {
        match self {
            WeightScheme::IidBernoulli { p } => RawMoments {
                e1: *p,
                e2: *p,
                e3: *p,
                e11: p * p,
                e21: p * p,
                e111: p * p * p,
            },
            WeightScheme::IidCustom(c) => RawMoments {
                e1: c.e1,
                e2: c.e2,
                e3: c.e3,
                e11: c.e1 * c.e1,
                e21: c.e2 * c.e1,
                e111: c.e1 * c.e1 * c.e1,
            },
            WeightScheme::SymMultinomial => {
                // Factorial moments: E N(N-1) = (n-1)/n, E N(N-1)(N-2) = (n-1)(n-2)/n^2,
                // E N_i N_j = (n-1)/n, E N_i(N_i-1)N_j = E N_i N_j N_k = (n-1)(n-2)/n^2.
                let nf = n as f64;
                let f2 = (nf - 1.0) / nf;
                let f3 = (nf - 1.0) * (nf - 2.0) / (nf * nf);
                RawMoments {
                    e1: 1.0,
                    e2: f2 + 1.0,
                    e3: f3 + 3.0 * f2 + 1.0,
                    e11: f2,
                    e21: f3 + f2,
                    e111: f3,
                }
            }
        }
    }

    pub fn mean(&self, n: usize) -> f64 {
        self.raw_moments(n).e1
    }

    pub fn sd(&self, n: usize) -> f64 {
        let m = self.raw_moments(n);
        (m.e2 - m.e1 * m.e1).max(0.0).sqrt()
    }

    /// Whether the Edgeworth-rate experiment may use this scheme.
    pub fn fifth_moment_finite(&self) -> bool {
        match self {
            WeightScheme::IidCustom(c) => c.fifth_moment_finite,
            _ => true,
        }
    }
}

/// Moments of the centered weights `w - theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternMoments {
    pub theta: f64,
    pub m1: f64,
    pub m2: f64,
    pub m2cross: f64,
    pub m3: f64,
    pub m21: f64,
    pub m111: f64,
    /// Large-`n` limit of `m2`.
    pub k_limit: f64,
    /// Large-`n` limit of `m2cross`.
    pub kprime_limit: f64,
    /// `theta` coincides with `E w_1`.
    pub theta_at_mean: bool,
}

pub fn pattern_moments(scheme: &WeightScheme, theta: f64, n: usize) -> PatternMoments {
    let r = scheme.raw_moments(n);
    let t = theta;
    let m2 = r.e2 - 2.0 * t * r.e1 + t * t;
    let m2cross = r.e11 - 2.0 * t * r.e1 + t * t;
    let (k_limit, kprime_limit) = match scheme {
        WeightScheme::SymMultinomial => (1.0 + (1.0 - t).powi(2), (1.0 - t).powi(2)),
        _ => (m2, m2cross),
    };
    PatternMoments {
        theta,
        m1: r.e1 - t,
        m2,
        m2cross,
        m3: r.e3 - 3.0 * t * r.e2 + 3.0 * t * t * r.e1 - t * t * t,
        m21: r.e21 - t * r.e2 - 2.0 * t * r.e11 + 3.0 * t * t * r.e1 - t * t * t,
        m111: r.e111 - 3.0 * t * r.e11 + 3.0 * t * t * r.e1 - t * t * t,
        k_limit,
        kprime_limit,
        theta_at_mean: (t - r.e1).abs() <= 1e-12 * r.e1.abs().max(1.0),
    }
}

/// Coefficients `[c3, c2, c1, c0]` of `m3`, `m21`, `m111` as polynomials in `theta`.
pub fn pattern_polynomials(scheme: &WeightScheme, n: usize) -> [[f64; 4]; 3] {
    let r = scheme.raw_moments(n);
    [
        [-1.0, 3.0 * r.e1, -3.0 * r.e2, r.e3],
        [-1.0, 3.0 * r.e1, -(r.e2 + 2.0 * r.e11), r.e21],
        [-1.0, 3.0 * r.e1, -3.0 * r.e11, r.e111],
    ]
}

pub fn gen_weights(scheme: &WeightScheme, n: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
    scheme.validate()?;
    if n < 2 {
        return Err(Error::ParameterDomain("n must be at least 2".into()));
    }
    Ok(match scheme {
        WeightScheme::IidBernoulli { p } => (0..n)
            .map(|_| if rng.random::<f64>() < *p { 1.0 } else { 0.0 })
            .collect(),
        WeightScheme::IidCustom(c) => match c.sampler {
            Sampler::PointMass { value } => vec![value; n],
            Sampler::Exponential { rate } => {
                let d = Exp::new(rate).map_err(|e| Error::ParameterDomain(e.to_string()))?;
                d.sample_iter(rng).take(n).collect()
            }
            Sampler::Gamma { shape, scale } => {
                let d = Gamma::new(shape, scale).map_err(|e| Error::ParameterDomain(e.to_string()))?;
                d.sample_iter(rng).take(n).collect()
            }
            Sampler::TwoPoint { a, b, p } => (0..n).map(|_| if rng.random::<f64>() < p { a } else { b }).collect(),
        },
        WeightScheme::SymMultinomial => {
            let mut counts = vec![0.0; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1.0;
            }
            counts
        }
    })
}

pub fn write_weights_csv<W: Write>(w: W, weights: &[f64]) -> Result<()> {
    write_column(w, "w", weights)
}

pub fn read_weights_csv<R: Read>(r: R) -> Result<Vec<f64>> {
    read_column(r, "w")
}
