//! Local Whittle estimation of the memory parameter.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::linproc::mean;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMethod {
    LocalWhittle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryEstimate {
    pub d_hat: f64,
    /// Number of Fourier frequencies used.
    pub m: usize,
    pub method: MemoryMethod,
    /// The optimum sits on the edge of `[0, D_MAX]`.
    pub at_boundary: bool,
}

pub const D_MAX: f64 = 0.499;
const MIN_N: usize = 64;

/// Local Whittle estimate over the first `floor(n^0.65)` Fourier frequencies,
/// minimized over `[0, D_MAX]` by golden-section search.
pub fn estimate_memory(x: &[f64]) -> Result<MemoryEstimate> {
    let n = x.len();
    if n < MIN_N {
        return Err(Error::ParameterDomain(format!(
            "memory estimation needs n >= {MIN_N}, got {n}"
        )));
    }
    let m = ((n as f64).powf(0.65).floor() as usize).clamp(1, (n - 1) / 2);
    let xbar = mean(x);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - xbar, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let two_pi = 2.0 * std::f64::consts::PI;
    let lambda: Vec<f64> = (1..=m).map(|j| two_pi * j as f64 / n as f64).collect();
    let pgram: Vec<f64> = buf[1..=m].iter().map(|c| c.norm_sqr() / (two_pi * n as f64)).collect();
    let mean_log_lambda = lambda.iter().map(|l| l.ln()).sum::<f64>() / m as f64;
    let objective = |d: f64| {
        let g = lambda.iter().zip(&pgram).map(|(l, i)| l.powf(2.0 * d) * i).sum::<f64>() / m as f64;
        g.ln() - 2.0 * d * mean_log_lambda
    };

    let (mut lo, mut hi) = (0.0, D_MAX);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (objective(a), objective(b));
    for _ in 0..100 {
        if !(fa.is_finite() && fb.is_finite()) {
            return Err(Error::Estimation("local Whittle objective is not finite".into()));
        }
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = objective(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = objective(b);
        }
        if hi - lo < 1e-8 {
            break;
        }
    }
    let mut d_hat = 0.5 * (lo + hi);
    // The interior search never evaluates the end points themselves.
    for edge in [0.0, D_MAX] {
        if objective(edge) < objective(d_hat) {
            d_hat = edge;
        }
    }
    if !objective(d_hat).is_finite() {
        return Err(Error::Estimation("local Whittle objective is not finite".into()));
    }
    let at_boundary = !(1e-6..=D_MAX - 1e-6).contains(&d_hat);
    Ok(MemoryEstimate {
        d_hat: d_hat.clamp(0.0, D_MAX),
        m,
        method: MemoryMethod::LocalWhittle,
        at_boundary,
    })
}
