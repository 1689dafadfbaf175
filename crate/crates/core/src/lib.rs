//! Randomized pivots and confidence intervals for the mean of short- and
//! long-memory linear processes.
//!
//! Data `X_1..X_n` are multiplied by independent random weights shifted by a
//! window constant `theta`. Choosing `theta` as a real root of the cubic
//! skewness functional `H(theta) = E(sum (w_i - theta) X_i)^3 / n` removes the
//! leading skewness term of the pivot, which makes its normal approximation
//! more accurate than the classical one.
//!
//! Module map:
//! - [`linproc`]: process simulation and second/third-order moment structure
//! - [`weights`]: weight generation and exact pattern moments
//! - [`window`]: the cubic `H(theta)`, its real roots, and window selection
//! - [`pivot`]: classical and randomized pivots with exact normalizers
//! - [`studentize`]: Bartlett-type studentizers, bandwidths, memory estimation
//! - [`ci`]: randomized and classical confidence intervals
//! - [`bootstrap`]: sieve, filtered sieve and moving-block baselines
//! - [`harness`]: Monte Carlo coverage and error-rate experiments

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod ci;
mod error;
pub mod harness;
pub mod linproc;
pub mod normal;
pub mod pivot;
pub mod rng;
pub mod studentize;
pub mod weights;
pub mod window;

pub use error::{Error, Result};
