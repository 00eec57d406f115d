//! Standard normal distribution helpers.
//!
//! Both functions go through `erfc`, which keeps full relative precision in
//! the lower tail where `1 - erf` would cancel.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF `Φ(x)`.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `1 - 2Φ(-a) = erf(a/√2)`, evaluated without cancellation for small `a`.
#[inline]
pub fn two_sided_mass(a: f64) -> f64 {
    libm::erf(a * FRAC_1_SQRT_2)
}
