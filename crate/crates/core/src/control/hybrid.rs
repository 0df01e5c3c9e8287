use serde::{Deserialize, Serialize};

use super::PowerLimitCommand;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridParams {
    /// Inertia term of the `h·s + d` support block, s.
    pub h: f64,
    pub d: f64,
    pub kp_p: f64,
    pub ki_p: f64,
    /// Q-V droop gain.
    pub nq: f64,
    /// Time constant of the filtered derivative, s.
    pub tau_d: f64,
    /// Time constant of the frequency measurement filter ahead of the support block, s.
    pub tau_f: f64,
    /// Clamp on the angle command, rad.
    pub delta_cmd_limit: f64,
}

impl HybridParams {
    pub fn table1() -> Self {
        Self {
            h: 5.0,
            d: 10.0,
            kp_p: 1.0,
            ki_p: 5.0,
            nq: 0.05,
            tau_d: 0.05,
            tau_f: 0.05,
            delta_cmd_limit: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau_d", self.tau_d), ("tau_f", self.tau_f)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.delta_cmd_limit.is_finite() && self.delta_cmd_limit > 0.0) {
            return Err(Error::InvalidParameter("delta_cmd_limit must be > 0".into()));
        }
        for (name, v) in [
            ("h", self.h),
            ("d", self.d),
            ("kp_p", self.kp_p),
            ("ki_p", self.ki_p),
            ("nq", self.nq),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HybridState {
    /// Power PI integrator, rad.
    pub p_integ: f64,
    /// Measured frequency deviation after the measurement filter, p.u.
    pub f_meas: f64,
    /// Low-passed `f_meas` behind the filtered derivative, p.u.
    pub df_lag: f64,
    /// Last angle command, rad.
    pub delta_cmd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportOutput {
    /// Power reference offset, p.u.
    pub dp: f64,
    pub df_meas: f64,
    pub ddf_lag: f64,
}

/// Inertia and damping support `dp = −(h·ḟ + d·Δf)` on the measured
/// frequency `Δf = f_meas`, a first-order lag `1/(τ_f·s + 1)` of the PLL
/// deviation `df_pu`; `ḟ` is the filtered derivative `s/(τ_d·s + 1)` of
/// `f_meas`. `dp` depends on the filter states only.
pub fn fp_support(df_pu: f64, state: &HybridState, params: &HybridParams) -> SupportOutput {
    let dfilt = (state.f_meas - state.df_lag) / params.tau_d;
    SupportOutput {
        dp: -(params.h * dfilt + params.d * state.f_meas),
        df_meas: (df_pu - state.f_meas) / params.tau_f,
        ddf_lag: dfilt,
    }
}

/// PI on the power error producing the angle command. Returns
/// `(delta_cmd, d(p_integ)/dt)`; the integrator is held when `freeze` is set.
pub fn power_pi_step(
    cmd: &PowerLimitCommand,
    p_meas: f64,
    state: &HybridState,
    params: &HybridParams,
    freeze: bool,
) -> (f64, f64) {
    let e = cmd.p_ref - p_meas;
    let raw = params.kp_p * e + state.p_integ;
    let delta_cmd = raw.clamp(-params.delta_cmd_limit, params.delta_cmd_limit);
    let rate = if freeze { 0.0 } else { params.ki_p * e };
    (delta_cmd, rate)
}

/// Conditional integration: hold the power integrator while the angle clamp or
/// the current limiter is engaged and the error pushes further the same way.
pub fn pi_should_freeze(
    cmd: &PowerLimitCommand,
    p_meas: f64,
    state: &HybridState,
    params: &HybridParams,
    current_limited: bool,
) -> bool {
    let e = cmd.p_ref - p_meas;
    let raw = params.kp_p * e + state.p_integ;
    let angle_clamped = (raw > params.delta_cmd_limit && e > 0.0) || (raw < -params.delta_cmd_limit && e < 0.0);
    angle_clamped || (current_limited && e * raw > 0.0)
}

/// Converter angle: PLL angle plus the power-loop shift.
pub fn hybrid_angle(theta_pll: f64, delta_cmd: f64) -> f64 {
    theta_pll + delta_cmd
}

/// Q-V droop `u0 + nq·(q_ref − q_meas)`, kept within [0.8, 1.2] p.u.
pub fn qv_voltage_ref(q_ref: f64, q_meas: f64, u0: f64, nq: f64) -> f64 {
    (u0 + nq * (q_ref - q_meas)).clamp(0.8, 1.2)
}
