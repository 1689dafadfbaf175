//! Standard normal helpers and goodness-of-fit distances.

use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is valid")
}

pub fn cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Inverse CDF, refined by one Newton step on the CDF.
pub fn quantile(p: f64) -> f64 {
    let dist = std_normal();
    let x = dist.inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    x - (dist.cdf(x) - p) / density
}

/// Two-sided critical value `z_{alpha/2}`.
pub fn z_two_sided(alpha: f64) -> f64 {
    quantile(1.0 - alpha / 2.0)
}

/// Kolmogorov distance `sup_x |F_n(x) - Phi(x)|` of a sample to the standard normal.
pub fn ks_distance(sample: &[f64]) -> f64 {
    let mut xs: Vec<f64> = sample.iter().copied().filter(|v| v.is_finite()).collect();
    if xs.is_empty() {
        return 1.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let dist = std_normal();
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = dist.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Sample mean and standard error of the mean.
pub fn mean_se(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
