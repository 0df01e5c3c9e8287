use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::per_unit::PerUnitBase;

/// Conventional P-f law `Δω = (P_ref − P)/(h·s + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfmPfParams {
    /// s
    pub h: f64,
    /// p.u. power per p.u. frequency
    pub d: f64,
}

impl GfmPfParams {
    pub fn table1() -> Self {
        Self { h: 5.0, d: 10.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0 && self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need h > 0, d >= 0; got h={} d={}",
                self.h, self.d
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GfmPfState {
    /// Frequency deviation, p.u.
    pub domega: f64,
    /// Internal angle relative to the nominal frame, rad (unwrapped).
    pub delta_i: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfmPfRates {
    pub ddomega: f64,
    pub ddelta_i: f64,
}

/// `h·dΔω/dt = (p_ref − p_meas) − d·Δω`, `dδ_i/dt = ω_base·Δω`.
pub fn gfm_pf_derivative(
    p_ref: f64,
    p_meas: f64,
    state: &GfmPfState,
    params: &GfmPfParams,
    base: &PerUnitBase,
) -> GfmPfRates {
    GfmPfRates {
        ddomega: ((p_ref - p_meas) - params.d * state.domega) / params.h,
        ddelta_i: base.omega_base() * state.domega,
    }
}
