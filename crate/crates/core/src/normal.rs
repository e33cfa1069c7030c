//! Standard normal density and distribution function.
//!
//! `pdf` is evaluated directly. `cdf` goes through the complementary error
//! function of the `libm` crate (a port of the FreeBSD msun routines, accurate to
//! about one ulp), as Φ(x) = erfc(-x/√2)/2, which keeps full relative accuracy
//! in the lower tail.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// φ(x), the N(0,1) density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Φ(x), the N(0,1) distribution function.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}
