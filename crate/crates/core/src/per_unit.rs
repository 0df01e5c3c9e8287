use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// System base quantities. Angular frequency is always derived from `f_base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BaseFields", into = "BaseFields")]
pub struct PerUnitBase {
    f_base: f64,
    s_base: f64,
    v_base: f64,
    omega_base: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseFields {
    f_base: f64,
    s_base: f64,
    v_base: f64,
}

impl TryFrom<BaseFields> for PerUnitBase {
    type Error = Error;
    fn try_from(b: BaseFields) -> Result<Self> {
        PerUnitBase::new(b.f_base, b.s_base, b.v_base)
    }
}

impl From<PerUnitBase> for BaseFields {
    fn from(b: PerUnitBase) -> Self {
        BaseFields {
            f_base: b.f_base,
            s_base: b.s_base,
            v_base: b.v_base,
        }
    }
}

impl PerUnitBase {
    /// `f_base` in Hz, `s_base` in VA, `v_base` line-to-line RMS in V.
    pub fn new(f_base: f64, s_base: f64, v_base: f64) -> Result<Self> {
        for (name, v) in [("f_base", f_base), ("s_base", s_base), ("v_base", v_base)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            f_base,
            s_base,
            v_base,
            omega_base: TAU * f_base,
        })
    }

    /// 50 Hz, 220 MVA, 66 kV.
    pub fn table1() -> Self {
        Self::new(50.0, 220e6, 66e3).expect("valid constants")
    }

    pub fn f_base(&self) -> f64 {
        self.f_base
    }
    pub fn s_base(&self) -> f64 {
        self.s_base
    }
    pub fn v_base(&self) -> f64 {
        self.v_base
    }
    pub fn omega_base(&self) -> f64 {
        self.omega_base
    }

    /// Base impedance in ohms, `V²/S`.
    pub fn z_base(&self) -> f64 {
        self.v_base * self.v_base / self.s_base
    }

    /// Base (line) current in amperes, `S/(√3·V)`.
    pub fn i_base(&self) -> f64 {
        self.s_base / (3f64.sqrt() * self.v_base)
    }

    pub fn power_to_pu(&self, watts: f64) -> f64 {
        watts / self.s_base
    }
    pub fn power_from_pu(&self, pu: f64) -> f64 {
        pu * self.s_base
    }
    pub fn voltage_to_pu(&self, volts: f64) -> f64 {
        volts / self.v_base
    }
    pub fn voltage_from_pu(&self, pu: f64) -> f64 {
        pu * self.v_base
    }
    pub fn current_to_pu(&self, amps: f64) -> f64 {
        amps / self.i_base()
    }
    pub fn current_from_pu(&self, pu: f64) -> f64 {
        pu * self.i_base()
    }
    pub fn impedance_to_pu(&self, ohms: f64) -> f64 {
        ohms / self.z_base()
    }
    pub fn impedance_from_pu(&self, pu: f64) -> f64 {
        pu * self.z_base()
    }

    /// Frequency deviation in p.u. of the base frequency.
    pub fn freq_dev_pu(&self, f_hz: f64) -> f64 {
        (f_hz - self.f_base) / self.f_base
    }

    pub fn freq_from_dev_pu(&self, df_pu: f64) -> f64 {
        self.f_base * (1.0 + df_pu)
    }
}
