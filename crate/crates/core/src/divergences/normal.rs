use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

/// Standard normal CDF `Φ(x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse standard normal CDF `Φ⁻¹(ε)` for `ε ∈ (0, 1)`.
///
/// Starts from `−√2 erfc⁻¹(2ε)` and polishes with Newton steps on `Φ(x) − ε`.
pub fn std_normal_inverse(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange { name: "eps", value: eps, allowed: "0 < eps < 1" });
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * eps);
    for _ in 0..3 {
        let pdf = std_normal_pdf(x);
        if pdf < 1e-300 {
            break;
        }
        let step = (std_normal_cdf(x) - eps) / pdf;
        if !step.is_finite() || step.abs() > 1.0 {
            break;
        }
        x -= step;
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}
