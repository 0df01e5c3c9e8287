//! Angle distribution between converter and grid.

use crate::error::{Error, Result};

/// `x_g/(x_g + x_l)`: share of the converter-to-grid angle that appears at the
/// PCC. An infinite `x_g` gives 1.
pub fn g_delta_x(x_l: f64, x_g: f64) -> Result<f64> {
    if !x_l.is_finite() || x_g.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "non-finite reactance x_l={x_l} x_g={x_g}"
        )));
    }
    if x_l < 0.0 || x_g < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "reactances must be >= 0, got x_l={x_l} x_g={x_g}"
        )));
    }
    if x_l + x_g == 0.0 {
        return Err(Error::DegenerateReactance);
    }
    if x_g.is_infinite() {
        return Ok(1.0);
    }
    Ok(x_g / (x_g + x_l))
}

/// `δ_pcc ≈ g·(δ_i − δ_g) + δ_g`.
pub fn predict_pcc_angle(delta_i: f64, delta_g: f64, g: f64) -> f64 {
    g * (delta_i - delta_g) + delta_g
}
