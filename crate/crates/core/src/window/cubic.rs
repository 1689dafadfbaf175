//! Real roots of polynomials of degree at most three.

use std::f64::consts::PI;

/// Result of a root search on `c[0] x^3 + c[1] x^2 + c[2] x + c[3]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Roots {
    /// Distinct real roots in increasing order (possibly empty).
    Finite(Vec<f64>),
    /// The zero polynomial: every real number is a root.
    Everywhere,
}

pub fn eval(c: &[f64; 4], x: f64) -> f64 {
    ((c[0] * x + c[1]) * x + c[2]) * x + c[3]
}

fn deriv(c: &[f64; 4], x: f64) -> f64 {
    (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2]
}

/// Coefficients below `REL_ZERO * max|c|` count as zero when deciding the degree.
const REL_ZERO: f64 = 1e-14;

pub fn real_roots(c: &[f64; 4]) -> Roots {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Roots::Everywhere;
    }
    let tiny = |v: f64| v.abs() <= REL_ZERO * scale;
    let mut roots = if !tiny(c[0]) {
        cubic(c[1] / c[0], c[2] / c[0], c[3] / c[0])
    } else if !tiny(c[1]) {
        quadratic(c[1], c[2], c[3])
    } else if !tiny(c[2]) {
        vec![-c[3] / c[2]]
    } else {
        Vec::new()
    };
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let d = deriv(c, *r);
            if d != 0.0 {
                let step = eval(c, *r) / d;
                if step.is_finite() {
                    *r -= step;
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0));
    Roots::Finite(roots)
}

fn quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Monic cubic `x^3 + b x^2 + c x + d`.
fn cubic(b: f64, c: f64, d: f64) -> Vec<f64> {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if p == 0.0 && q == 0.0 {
        return vec![-shift];
    }
    if disc > 0.0 {
        let s = disc.sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        vec![t - shift]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .collect()
    }
}
