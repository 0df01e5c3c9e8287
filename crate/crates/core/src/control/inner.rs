use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dq::{clamp_magnitude, DqPair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerParams {
    pub kp_i: f64,
    pub ki_i: f64,
    /// Virtual admittance `1/(r_v + j·x_v)`.
    pub r_v: f64,
    pub x_v: f64,
    pub i_lim: f64,
    /// Reactance used for the `j·x·i` decoupling feed-forward.
    pub x_ff: f64,
    /// EMF magnitude above which the current integrator stops winding up.
    pub e_max: f64,
}

impl InnerParams {
    pub fn table1() -> Self {
        Self {
            kp_i: 0.5,
            ki_i: 16.0,
            r_v: 0.022,
            x_v: 0.17,
            i_lim: 1.2,
            x_ff: 0.17,
            e_max: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_v.is_finite() && self.x_v > 0.0) {
            return Err(Error::InvalidParameter(format!("x_v must be > 0, got {}", self.x_v)));
        }
        if !(self.i_lim.is_finite() && self.i_lim >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "i_lim must be >= 0, got {}",
                self.i_lim
            )));
        }
        for (name, v) in [
            ("kp_i", self.kp_i),
            ("ki_i", self.ki_i),
            ("r_v", self.r_v),
            ("x_ff", self.x_ff),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.e_max.is_finite() && self.e_max > 0.0) {
            return Err(Error::InvalidParameter("e_max must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InnerState {
    pub integ: DqPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOutput {
    pub e_c: DqPair,
    pub dinteg: DqPair,
    pub i_ref: DqPair,
    pub i_ref_lim: DqPair,
    pub limiter_active: bool,
}

/// Virtual admittance → circular current limiter → current PI with voltage
/// and cross-coupling feed-forward.
pub fn inner_cascade(
    v_mag_ref: f64,
    delta_i: f64,
    v_meas: DqPair,
    i_meas: DqPair,
    state: &InnerState,
    params: &InnerParams,
) -> InnerOutput {
    let v_ref = DqPair::from_polar(v_mag_ref, delta_i);
    let i_ref = DqPair::from_complex((v_ref - v_meas).to_complex() / Complex64::new(params.r_v, params.x_v));
    let (i_ref_lim, limiter_active) = clamp_magnitude(i_ref, params.i_lim);
    let err = i_ref_lim - i_meas;
    let e_c = v_meas + err.scale(params.kp_i) + state.integ + i_meas.perp().scale(params.x_ff);

    let mut dinteg = err.scale(params.ki_i);
    if e_c.magnitude() > params.e_max {
        if dinteg.d * e_c.d > 0.0 {
            dinteg.d = 0.0;
        }
        if dinteg.q * e_c.q > 0.0 {
            dinteg.q = 0.0;
        }
    }
    InnerOutput {
        e_c,
        dinteg,
        i_ref,
        i_ref_lim,
        limiter_active,
    }
}
