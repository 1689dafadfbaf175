//! The cubic skewness functional `H(theta)` and selection of the window constant.
//!
//! `H(theta) = m3(theta) C3 + 3 m21(theta) C21 + 6 m111(theta) C111`, where the
//! `m*` are pattern moments of the centered weights and the `C*` are lag-weighted
//! third moments of the data. `theta` is chosen as a real root of `H`, away from
//! `E w_1`, so the randomized pivot has no leading skewness term.

pub mod cubic;

use serde::{Deserialize, Serialize};

use crate::linproc::{model_third_order_sums, MomentSource, MomentStructure, ProcessSpec, ThirdOrderSums};
use crate::pivot::{randomized_variance, tapered_lag_sum};
use crate::weights::{pattern_polynomials, WeightScheme};
use crate::{Error, Result};
use cubic::Roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    Model,
    PlugIn,
}

/// `H(theta) = c[0] theta^3 + c[1] theta^2 + c[2] theta + c[3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub c: [f64; 4],
    pub mode: WindowMode,
}

impl CubicCoeffs {
    pub fn eval(&self, theta: f64) -> f64 {
        cubic::eval(&self.c, theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", content = "theta", rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Admissible root farthest from `E w_1`; shortest expected interval.
    #[default]
    MaxDistance,
    /// Admissible root closest to `E w_1`.
    NearestAdmissible,
    /// User-supplied value; roots are still reported.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowTolerances {
    /// Exclusion half-width around `E w_1`, in units of `sd(w_1)`.
    pub exclusion: f64,
    /// Accepted residual `|H|` in units of `max(1, |c0|)`.
    pub residual: f64,
}

impl Default for WindowTolerances {
    fn default() -> Self {
        Self {
            exclusion: 0.05,
            residual: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedRoot {
    pub root: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSolution {
    pub coeffs: [f64; 4],
    pub roots: Vec<f64>,
    pub selected: f64,
    pub excluded: Vec<ExcludedRoot>,
    /// `H(selected)`.
    pub residual: f64,
    pub mode: WindowMode,
    /// `H` vanished identically.
    pub degenerate: bool,
    /// `selected` is a root rather than a residual minimizer or a fixed value.
    pub exact_root: bool,
}

impl WindowSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("window solution serializes")
    }
}

/// Coefficients of `H` from lag-weighted third-order sums.
pub fn coefficients_from_sums(sums: &ThirdOrderSums, scheme: &WeightScheme, n: usize, mode: WindowMode) -> CubicCoeffs {
    let [p3, p21, p111] = pattern_polynomials(scheme, n);
    let mut c = [0.0; 4];
    for i in 0..4 {
        c[i] = sums.single * p3[i] + 3.0 * sums.pair * p21[i] + 6.0 * sums.triple * p111[i];
    }
    CubicCoeffs { c, mode }
}

pub fn cubic_coefficients(mom: &MomentStructure, scheme: &WeightScheme, n: usize) -> Result<CubicCoeffs> {
    let sums = mom.third()?.sums(n);
    let mode = match mom.source {
        MomentSource::Model => WindowMode::Model,
        MomentSource::PlugIn { .. } => WindowMode::PlugIn,
    };
    Ok(coefficients_from_sums(&sums, scheme, n, mode))
}

/// Model-mode coefficients using every lag below `n`, in `O(n K)` time.
pub fn model_cubic_coefficients(spec: &ProcessSpec, scheme: &WeightScheme, n: usize) -> Result<CubicCoeffs> {
    let sums = model_third_order_sums(spec, n, None)?;
    Ok(coefficients_from_sums(&sums, scheme, n, WindowMode::Model))
}

const GRID_POINTS: usize = 20_001;

pub fn solve_window_constant(
    coeffs: &CubicCoeffs,
    scheme: &WeightScheme,
    n: usize,
    policy: SelectionPolicy,
) -> Result<WindowSolution> {
    solve_window_constant_with(coeffs, scheme, n, policy, WindowTolerances::default())
}

pub fn solve_window_constant_with(
    coeffs: &CubicCoeffs,
    scheme: &WeightScheme,
    n: usize,
    policy: SelectionPolicy,
    tol: WindowTolerances,
) -> Result<WindowSolution> {
    if coeffs.c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoAdmissibleWindow("non-finite cubic coefficients".into()));
    }
    let ew = scheme.mean(n);
    let sd = scheme.sd(n);
    let eps = tol.exclusion * sd;
    let delta_max = tol.residual * coeffs.c[3].abs().max(1.0);
    let admissible = |t: f64| (t - ew).abs() >= eps;

    let roots = match cubic::real_roots(&coeffs.c) {
        Roots::Everywhere => {
            let selected = match policy {
                SelectionPolicy::Fixed(t) => t,
                _ => ew + 1.0,
            };
            return Ok(WindowSolution {
                coeffs: coeffs.c,
                roots: Vec::new(),
                selected,
                excluded: Vec::new(),
                residual: 0.0,
                mode: coeffs.mode,
                degenerate: true,
                exact_root: true,
            });
        }
        Roots::Finite(r) => r,
    };
    let mut excluded = Vec::new();
    let mut candidates = Vec::new();
    for &r in &roots {
        if admissible(r) {
            candidates.push(r);
        } else {
            excluded.push(ExcludedRoot {
                root: r,
                reason: format!("within {eps:.4} of the weight mean {ew}"),
            });
        }
    }
    let distance = |t: &f64| (t - ew).abs();
    let (selected, exact_root) = match policy {
        SelectionPolicy::Fixed(t) => {
            if !admissible(t) {
                return Err(Error::NoAdmissibleWindow(format!(
                    "fixed theta {t} lies within {eps:.4} of the weight mean"
                )));
            }
            (t, roots.iter().any(|r| (r - t).abs() <= 1e-12 * t.abs().max(1.0)))
        }
        SelectionPolicy::MaxDistance if !candidates.is_empty() => (
            candidates
                .iter()
                .copied()
                .max_by(|a, b| distance(a).total_cmp(&distance(b)))
                .unwrap(),
            true,
        ),
        SelectionPolicy::NearestAdmissible if !candidates.is_empty() => (
            candidates
                .iter()
                .copied()
                .min_by(|a, b| distance(a).total_cmp(&distance(b)))
                .unwrap(),
            true,
        ),
        _ => {
            let half = 10.0 * sd + 1.0;
            let step = 2.0 * half / (GRID_POINTS - 1) as f64;
            let best = (0..GRID_POINTS)
                .map(|i| ew - half + step * i as f64)
                .filter(|t| admissible(*t))
                .min_by(|a, b| coeffs.eval(*a).abs().total_cmp(&coeffs.eval(*b).abs()));
            match best {
                Some(t) if coeffs.eval(t).abs() <= delta_max => (t, false),
                Some(t) => {
                    return Err(Error::NoAdmissibleWindow(format!(
                        "smallest admissible |H| is {:.3e} at theta {t:.4}, above {delta_max:.3e}",
                        coeffs.eval(t).abs()
                    )))
                }
                None => return Err(Error::NoAdmissibleWindow("empty search grid".into())),
            }
        }
    };
    Ok(WindowSolution {
        coeffs: coeffs.c,
        roots,
        selected,
        excluded,
        residual: coeffs.eval(selected),
        mode: coeffs.mode,
        degenerate: false,
        exact_root,
    })
}

/// Skewness of the classical pivot: `(C3 + 3 C21 + 6 C111) / (sqrt(n) v^{3/2})`
/// with `v = gamma_0 + 2 sum (1 - h/n) gamma_h`.
pub fn skewness_classical(mom: &MomentStructure, n: usize) -> Result<f64> {
    let s = mom.third()?.sums(n);
    let v = mom.gamma[0] + 2.0 * tapered_lag_sum(&mom.gamma, n);
    if !(v > 0.0) {
        return Err(Error::DegenerateVariance(format!("long-run variance term is {v}")));
    }
    Ok((s.single + 3.0 * s.pair + 6.0 * s.triple) / ((n as f64).sqrt() * v.powf(1.5)))
}

/// Skewness of the randomized pivot at `theta`: `n H(theta) / (n D)^{3/2}`.
pub fn skewness_randomized(mom: &MomentStructure, scheme: &WeightScheme, theta: f64, n: usize) -> Result<f64> {
    let h = cubic_coefficients(mom, scheme, n)?.eval(theta);
    let var = randomized_variance(scheme, theta, &mom.gamma, n)?;
    Ok(h * n as f64 / var.powf(1.5))
}
