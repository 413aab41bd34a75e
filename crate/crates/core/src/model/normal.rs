//! Standard normal density and distribution function.
//!
//! `Φ` is evaluated through `erfc` (musl/FreeBSD port in `libm`, < 1 ulp),
//! which keeps relative accuracy in both tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}
