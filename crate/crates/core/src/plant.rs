//! Series-branch network in a frame rotating at nominal frequency:
//!
//! ```text
//! EMF -(r_f, l_f)- terminal -(r_l, x_l)- PCC -(r_g, x_g)- grid source
//! ```
//!
//! Inductances are in p.u. of the nominal-frequency reactance, so a branch with
//! reactance `x` has `(x/ω_base)·di/dt` as its voltage drop in p.u. with time
//! in seconds.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dq::DqPair;
use crate::error::{Error, Result};
use crate::per_unit::PerUnitBase;

/// Current magnitude at which a run is declared diverged.
pub const CURRENT_BOUND: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    pub r_f: f64,
    pub l_f: f64,
    pub r_l: f64,
    pub x_l: f64,
    pub r_g: f64,
    pub x_g: f64,
    pub u0: f64,
}

impl CircuitParams {
    /// Filter 0.012 + j0.12, line 0.01 + j0.05, grid 0.1 + j/SCR with SCR = 1.2.
    pub fn table1() -> Self {
        Self::with_scr(1.2)
    }

    pub fn with_scr(scr: f64) -> Self {
        Self {
            r_f: 0.012,
            l_f: 0.12,
            r_l: 0.01,
            x_l: 0.05,
            r_g: 0.1,
            x_g: 1.0 / scr,
            u0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [("l_f", self.l_f), ("x_l", self.x_l), ("x_g", self.x_g), ("u0", self.u0)];
        let nonneg = [("r_f", self.r_f), ("r_l", self.r_l), ("r_g", self.r_g)];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn l_total(&self) -> f64 {
        self.l_f + self.x_l + self.x_g
    }

    pub fn r_total(&self) -> f64 {
        self.r_f + self.r_l + self.r_g
    }

    /// Physical reactance between converter EMF and PCC.
    pub fn converter_reactance(&self) -> f64 {
        self.l_f + self.x_l
    }

    pub fn scr(&self) -> f64 {
        1.0 / self.x_g
    }

    /// Grid source voltage at angle `delta_g`.
    pub fn grid_voltage(&self, delta_g: f64) -> DqPair {
        DqPair::from_polar(self.u0, delta_g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    /// Series current, p.u.
    pub i: DqPair,
    /// Grid source angle relative to the nominal frame, rad (unwrapped).
    pub delta_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantRates {
    /// p.u./s
    pub di_dt: DqPair,
    /// rad/s
    pub ddelta_g: f64,
}

/// `(L_Σ/ω_base)·di/dt = e_c − u_g − (R_Σ + jL_Σ)·i`, `dδ_g/dt = 2π(f_grid − f_base)`.
pub fn plant_derivative(
    state: &PlantState,
    e_c: DqPair,
    params: &CircuitParams,
    f_grid: f64,
    base: &PerUnitBase,
) -> Result<PlantRates> {
    let mag = state.i.magnitude();
    if !(mag < CURRENT_BOUND) {
        return Err(Error::InvalidParameter(format!(
            "current magnitude {mag:.4} p.u. reached the divergence bound"
        )));
    }
    let u_g = params.grid_voltage(state.delta_g);
    let l = params.l_total();
    let drop = state.i.scale(params.r_total()) + state.i.perp().scale(l);
    let di_dt = (e_c - u_g - drop).scale(base.omega_base() / l);
    Ok(PlantRates {
        di_dt,
        ddelta_g: TAU * (f_grid - base.f_base()),
    })
}

/// PCC voltage reconstructed from the grid side:
/// `v = u_g + r_g·i + (x_g/ω_base)·di/dt + j·x_g·i`.
pub fn measure_pcc(state: &PlantState, params: &CircuitParams, di_dt: DqPair, base: &PerUnitBase) -> DqPair {
    let u_g = params.grid_voltage(state.delta_g);
    u_g + state.i.scale(params.r_g) + di_dt.scale(params.x_g / base.omega_base()) + state.i.perp().scale(params.x_g)
}

/// Generator convention: `P = v_d·i_d + v_q·i_q`, `Q = v_q·i_d − v_d·i_q`.
pub fn compute_power(v: DqPair, i: DqPair) -> (f64, f64) {
    (v.d * i.d + v.q * i.q, v.q * i.d - v.d * i.q)
}
