//! Energy-storage state of charge and the power window it allows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EssParams {
    /// Energy capacity, p.u.·s
    pub e_cap: f64,
    pub soc_high: f64,
    pub soc_low: f64,
    pub p_rating: f64,
    /// A SoC limit engaged at `soc_high` releases only below `soc_high − band`
    /// (and symmetrically at the low end).
    pub hysteresis_band: f64,
}

impl EssParams {
    pub fn table1() -> Self {
        Self {
            e_cap: 5.0,
            soc_high: 0.9,
            soc_low: 0.0,
            p_rating: 1.0,
            hysteresis_band: 0.02,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_cap.is_finite() && self.e_cap > 0.0) {
            return Err(Error::InvalidParameter("e_cap must be > 0".into()));
        }
        if !(0.0 <= self.soc_low && self.soc_low < self.soc_high && self.soc_high <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= soc_low < soc_high <= 1, got {} / {}",
                self.soc_low, self.soc_high
            )));
        }
        if !(self.p_rating.is_finite() && self.p_rating >= 0.0) {
            return Err(Error::InvalidParameter("p_rating must be >= 0".into()));
        }
        if !(self.hysteresis_band.is_finite() && self.hysteresis_band >= 0.0) {
            return Err(Error::InvalidParameter("hysteresis_band must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssState {
    pub soc: f64,
    /// Charging blocked (high SoC latch).
    pub high_latched: bool,
    /// Discharging blocked (low SoC latch).
    pub low_latched: bool,
    /// Set when the last step had to clamp SoC into [0, 1].
    pub clamped: bool,
}

impl EssState {
    pub fn new(soc: f64) -> Self {
        Self {
            soc,
            high_latched: false,
            low_latched: false,
            clamped: false,
        }
    }
}

/// Advance SoC by `−P·dt/e_cap`. Discharge (`P > 0`) lowers SoC.
pub fn soc_step(state: EssState, p: f64, dt: f64, params: &EssParams) -> EssState {
    let raw = state.soc - p * dt / params.e_cap;
    let soc = raw.clamp(0.0, 1.0);
    EssState {
        soc,
        clamped: soc != raw,
        ..state
    }
}

/// Update the hysteresis latches for the current SoC.
pub fn update_latches(state: EssState, params: &EssParams) -> EssState {
    let mut s = state;
    if s.soc >= params.soc_high {
        s.high_latched = true;
    } else if s.soc < params.soc_high - params.hysteresis_band {
        s.high_latched = false;
    }
    if s.soc <= params.soc_low {
        s.low_latched = true;
    } else if s.soc > params.soc_low + params.hysteresis_band {
        s.low_latched = false;
    }
    s
}

/// Allowed `(p_min, p_max)` given the (latched) SoC state.
pub fn ess_power_limits(state: &EssState, params: &EssParams) -> (f64, f64) {
    let s = update_latches(*state, params);
    let p_min = if s.high_latched { 0.0 } else { -params.p_rating };
    let p_max = if s.low_latched { 0.0 } else { params.p_rating };
    (p_min, p_max)
}
