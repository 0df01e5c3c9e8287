use serde::{Deserialize, Serialize};

use crate::control::{ControllerKind, GfmPfParams, HybridParams, InnerParams};
use crate::error::{Error, Result};
use crate::ess::EssParams;
use crate::per_unit::PerUnitBase;
use crate::plant::CircuitParams;
use crate::pll::PllParams;
use crate::profile::FrequencyProfile;

/// Largest admissible integration step, s.
pub const MAX_DT: f64 = 1e-3;

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub controller: ControllerKind,
    /// p.u.
    pub p_ref: f64,
    /// p.u.
    pub q_ref: f64,
    /// Step `[time s, size p.u.]` added to `p_ref`.
    #[serde(default)]
    pub p_step: Option<[f64; 2]>,
    pub profile: FrequencyProfile,
    pub initial_soc: f64,
    /// Explicit `[p_min, p_max]` for the hybrid saturation block. Intersected
    /// with the SoC window when `limit_policy` is on.
    pub power_limits: Option<[f64; 2]>,
    /// Apply the SoC-dependent power window.
    pub limit_policy: bool,
    /// Simulated time after the pre-roll, s.
    pub t_end: f64,
    /// Integration step, s.
    pub dt: f64,
    /// Settling time before t = 0, discarded from the trace, s.
    pub pre_roll: f64,
    /// Trace sample spacing, s. Must be a whole multiple of `dt`.
    pub output_interval: f64,
    /// Corner frequency of the second-order Butterworth P/Q measurement
    /// filter feeding the outer controllers, Hz.
    pub power_filter_hz: f64,
    /// Rate at which the applied power window follows SoC or limit changes, p.u./s.
    pub limit_slew: f64,
    pub base: PerUnitBase,
    pub circuit: CircuitParams,
    pub pll: PllParams,
    pub inner: InnerParams,
    pub gfm: GfmPfParams,
    pub hybrid: HybridParams,
    pub ess: EssParams,
}

/// Post-event simulated time used by the built-in scenarios, s.
pub const TAIL: f64 = 3.0;
/// Start of the frequency event in the built-in scenarios, s.
pub const EVENT_START: f64 = 1.0;
/// Current limit applied when the SoC limit policy is switched off.
pub const TABLE1_CURRENT_LIMIT: f64 = 1.2;

impl Scenario {
    /// Reference system with the hybrid controller at zero power on a flat 50 Hz grid.
    pub fn table1() -> Self {
        Self {
            name: "table1".into(),
            controller: ControllerKind::HybridFpQv,
            p_ref: 0.0,
            q_ref: 0.0,
            p_step: None,
            profile: FrequencyProfile::flat(50.0),
            initial_soc: 0.5,
            power_limits: None,
            limit_policy: true,
            t_end: 5.0,
            dt: 1e-4,
            pre_roll: 10.0,
            output_interval: 1e-3,
            power_filter_hz: 8.0,
            limit_slew: 1.0,
            base: PerUnitBase::table1(),
            circuit: CircuitParams::table1(),
            pll: PllParams::table1(),
            inner: InnerParams::table1(),
            gfm: GfmPfParams::table1(),
            hybrid: HybridParams::table1(),
            ess: EssParams::table1(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return bad(format!("dt must be in (0, {MAX_DT}], got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if !(self.pre_roll.is_finite() && self.pre_roll >= 0.0) {
            return bad(format!("pre_roll must be >= 0, got {}", self.pre_roll));
        }
        if !(0.0..=1.0).contains(&self.initial_soc) {
            return bad(format!("initial_soc must be in [0, 1], got {}", self.initial_soc));
        }
        if !(self.p_ref.is_finite() && self.q_ref.is_finite()) {
            return bad("p_ref and q_ref must be finite".into());
        }
        if let Some([t0, dp]) = self.p_step {
            if !(t0.is_finite() && t0 >= 0.0 && dp.is_finite()) {
                return bad(format!("p_step must be [time >= 0, finite size], got [{t0}, {dp}]"));
            }
        }
        if !(self.power_filter_hz.is_finite() && self.power_filter_hz > 0.0) {
            return bad(format!("power_filter_hz must be > 0, got {}", self.power_filter_hz));
        }
        if !(self.limit_slew.is_finite() && self.limit_slew > 0.0) {
            return bad(format!("limit_slew must be > 0, got {}", self.limit_slew));
        }
        let ratio = self.output_interval / self.dt;
        if !(ratio >= 1.0 - 1e-9 && (ratio - ratio.round()).abs() < 1e-6) {
            return bad(format!(
                "output_interval {} must be a whole multiple of dt {}",
                self.output_interval, self.dt
            ));
        }
        if let Some([lo, hi]) = self.power_limits {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("power_limits must satisfy p_min <= p_max, got [{lo}, {hi}]"));
            }
        }
        let wrap = |e: Error| match e {
            Error::InvalidParameter(m) => Error::InvalidScenario(m),
            other => other,
        };
        self.circuit.validate().map_err(wrap)?;
        self.pll.validate().map_err(wrap)?;
        self.inner.validate().map_err(wrap)?;
        self.gfm.validate().map_err(wrap)?;
        self.hybrid.validate().map_err(wrap)?;
        self.ess.validate().map_err(wrap)?;
        Ok(())
    }

    /// Integration steps per trace sample.
    pub fn decimation(&self) -> usize {
        (self.output_interval / self.dt).round() as usize
    }

    /// Number of trace samples produced by a full run.
    pub fn sample_count(&self) -> usize {
        (self.t_end / self.output_interval + 1e-9).floor() as usize + 1
    }

    /// Change every ramp of the profile to `rocof` Hz/s, keeping the target
    /// frequencies and the post-event tail length.
    pub fn with_ramp_rate(&self, rocof: f64) -> Result<Self> {
        let tail = self.t_end - self.profile.end_time();
        let profile = self.profile.with_ramp_rate(rocof)?;
        let t_end = if tail > 0.0 {
            profile.end_time() + tail
        } else {
            self.t_end
        };
        Ok(Self {
            profile,
            t_end,
            ..self.clone()
        })
    }

    /// Companion run with the SoC-motivated limiting removed: no SoC power
    /// window, no explicit power limits, and the rated current limit.
    pub fn without_limit_policy(&self) -> Self {
        let mut s = self.clone();
        s.limit_policy = false;
        s.power_limits = None;
        s.inner.i_lim = TABLE1_CURRENT_LIMIT;
        s.name = format!("{}-no-policy", self.name);
        s
    }
}

/// A named built-in scenario and the RoCoF values it is swept over.
#[derive(Debug, Clone)]
pub struct BuiltinScenario {
    pub name: &'static str,
    pub description: &'static str,
    pub scenario: Scenario,
    /// Hz/s; empty when the scenario is a single run.
    pub rocof_set: Vec<f64>,
}

fn event(rocof: f64, target: f64) -> FrequencyProfile {
    FrequencyProfile::ramp_to(50.0, EVENT_START, rocof, target).expect("valid built-in profile")
}

fn study(name: &str, controller: ControllerKind, p_ref: f64, profile: FrequencyProfile) -> Scenario {
    let t_end = profile.end_time() + TAIL;
    Scenario {
        name: name.into(),
        controller,
        p_ref,
        profile,
        t_end,
        ..Scenario::table1()
    }
}

/// The five scenarios of the comparison study, all on the reference system.
pub fn builtin_scenarios() -> Vec<BuiltinScenario> {
    use ControllerKind::*;
    let fig7 = study("fig7", PfGfm, 0.9, event(-1.0, 48.0));
    let fig8 = Scenario {
        initial_soc: 0.9,
        inner: InnerParams {
            i_lim: 0.012,
            ..InnerParams::table1()
        },
        ..study("fig8", PfGfm, 0.0, event(1.0, 52.0))
    };
    let fig9 = Scenario {
        initial_soc: 1.0,
        ..study("fig9", HybridFpQv, 0.5, event(-1.0, 48.0))
    };
    // the explicit 1 p.u. limit is the only limit under study; SoC is tracked
    let fig10a = Scenario {
        initial_soc: 1.0,
        power_limits: Some([-1.0, 1.0]),
        limit_policy: false,
        ..study("fig10a", HybridFpQv, 0.9, event(-1.0, 48.0))
    };
    let fig10b = Scenario {
        initial_soc: 0.9,
        power_limits: Some([0.0, 0.0]),
        ..study("fig10b", HybridFpQv, 0.0, event(1.0, 52.0))
    };
    vec![
        BuiltinScenario {
            name: "fig7",
            description: "P-f control near the power limit, -1 Hz/s to 48 Hz",
            scenario: fig7,
            rocof_set: vec![],
        },
        BuiltinScenario {
            name: "fig8",
            description: "P-f control at SoC 0.9 with a 0.012 p.u. current limit, +1 Hz/s to 52 Hz",
            scenario: fig8,
            rocof_set: vec![],
        },
        BuiltinScenario {
            name: "fig9",
            description: "hybrid f-P control at 0.5 p.u., -1 Hz/s to 48 Hz",
            scenario: fig9,
            rocof_set: vec![],
        },
        BuiltinScenario {
            name: "fig10a",
            description: "hybrid f-P control at 0.9 p.u. with a 1 p.u. power limit, under-frequency ramps to 48 Hz",
            scenario: fig10a,
            rocof_set: vec![-0.5, -1.0, -2.0],
        },
        BuiltinScenario {
            name: "fig10b",
            description: "hybrid f-P control at 0 p.u. with a 0 p.u. power limit, over-frequency ramps to 52 Hz",
            scenario: fig10b,
            rocof_set: vec![0.5, 1.0, 2.0],
        },
    ]
}

/// Look up a built-in scenario by name.
pub fn find_builtin(name: &str) -> Option<BuiltinScenario> {
    builtin_scenarios().into_iter().find(|b| b.name == name)
}
