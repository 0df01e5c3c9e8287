//! Outer controllers (conventional P-f and hybrid f-P & Q-V) and the shared
//! inner cascade that turns a voltage reference into a converter EMF.

mod gfm;
mod hybrid;
mod inner;

use serde::{Deserialize, Serialize};

pub use gfm::{gfm_pf_derivative, GfmPfParams, GfmPfRates, GfmPfState};
pub use hybrid::{
    fp_support, hybrid_angle, pi_should_freeze, power_pi_step, qv_voltage_ref, HybridParams, HybridState, SupportOutput,
};
pub use inner::{inner_cascade, InnerOutput, InnerParams, InnerState};

/// Outer control law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// Conventional P-f grid-forming control.
    PfGfm,
    /// PLL-synchronised f-P power support with Q-V droop.
    HybridFpQv,
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControllerKind::PfGfm => "pf_gfm",
            ControllerKind::HybridFpQv => "hybrid_fp_qv",
        })
    }
}

/// Power reference after the saturation block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLimitCommand {
    pub p_ref: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub saturated: bool,
}

/// `clamp(p_ref + dp, p_min, p_max)`, flagging whether the clamp engaged.
pub fn saturate_power_ref(p_ref: f64, dp: f64, limits: (f64, f64)) -> PowerLimitCommand {
    let (p_min, p_max) = limits;
    debug_assert!(p_min <= p_max);
    let raw = p_ref + dp;
    let out = raw.clamp(p_min, p_max);
    PowerLimitCommand {
        p_ref: out,
        p_min,
        p_max,
        saturated: out != raw,
    }
}
