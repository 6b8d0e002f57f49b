use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel::bessel_k0;
use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// Result of checking `∫ ⟨y⟩⁻¹ ⋯ ⟨y⟩⁻¹` (an `(m-1)`-fold convolution at the
/// origin) against `2^m m!`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckResult {
    pub m: u32,
    pub numeric_value: f64,
    pub bound: f64,
    pub passes: bool,
}

pub const MAX_BOUND_ORDER: u32 = 8;

/// Evaluates `∫_ℝ (2 K₀(2π|ξ|))^m dξ`, the Fourier-side form of the
/// `(m-1)`-fold convolution of `⟨·⟩⁻¹` at zero, and compares with `2^m m!`.
pub fn convolution_bound_check(m: u32) -> Result<BoundCheckResult> {
    if m == 0 || m > MAX_BOUND_ORDER {
        return Err(Error::domain(format!(
            "convolution order m must be in 1..={MAX_BOUND_ORDER}, got {m}"
        )));
    }
    let numeric_value = fourier_power_integral(m);
    let bound = (1..=m).fold(2f64.powi(m as i32), |acc, k| acc * k as f64);
    Ok(BoundCheckResult { m, numeric_value, bound, passes: numeric_value < bound })
}

/// `∫_ℝ (2K₀(2π|ξ|))^m dξ = (1/π) ∫₀^∞ (2K₀(u))^m du`.
fn fourier_power_integral(m: u32) -> f64 {
    let rule = GaussRule::new(24);
    let power = |u: f64| (2.0 * bessel_k0(u)).powi(m as i32);
    // (0, 1]: u = e^{-s} removes the logarithmic singularity.
    let near = rule.integrate_composite(0.0, 160.0, 160, |s| {
        let u = (-s).exp();
        power(u) * u
    });
    // [1, ∞): exponential decay e^{-mu}; 60 units is far below double precision.
    let far = rule.integrate_composite(1.0, 61.0, 120, power);
    (near + far) / PI
}
