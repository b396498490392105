//! GELU activation in the exact Gaussian-CDF form: `gelu(x) = x * Phi(x)`.

use std::f64::consts::PI;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF.
#[inline]
fn phi(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x * FRAC_1_SQRT_2))
}

/// Standard normal density.
#[inline]
fn phi_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[inline]
pub fn gelu_fwd(x: f64) -> f64 {
    x * phi(x)
}

/// Derivative of GELU: `Phi(x) + x * phi(x)`.
#[inline]
pub fn gelu_bwd(x: f64) -> f64 {
    phi(x) + x * phi_pdf(x)
}
