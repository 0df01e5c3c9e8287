//! Synchronous-reference-frame PLL.
//!
//! The phase detector is the q-axis voltage in the PLL frame normalised by the
//! voltage magnitude (floored at [`NORM_FLOOR`]), so the gains act on an angle
//! error in radians regardless of voltage dips.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::analysis::linear::LinearModel;
use crate::dq::DqPair;
use crate::error::{Error, Result};
use crate::per_unit::PerUnitBase;

pub const NORM_FLOOR: f64 = 0.1;
pub const COLLAPSE_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PllParams {
    /// rad/s per rad of error
    pub kp: f64,
    /// rad/s² per rad of error
    pub ki: f64,
}

impl PllParams {
    pub fn table1() -> Self {
        Self { kp: 800.0, ki: 1500.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kp.is_finite() && self.kp > 0.0 && self.ki.is_finite() && self.ki > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "PLL gains must be positive, got kp={} ki={}",
                self.kp, self.ki
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PllState {
    /// rad, unwrapped, relative to the nominal frame
    pub theta: f64,
    /// rad/s
    pub omega_int: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PllOutput {
    pub dtheta: f64,
    pub domega_int: f64,
    pub theta: f64,
    pub f_pll: f64,
    /// Normalised phase error, rad.
    pub error: f64,
}

pub fn pll_derivative(state: &PllState, v_pcc: DqPair, params: &PllParams, base: &PerUnitBase) -> Result<PllOutput> {
    let mag = v_pcc.magnitude();
    if !(mag >= COLLAPSE_THRESHOLD) {
        return Err(Error::VoltageCollapse { magnitude: mag });
    }
    Ok(pll_output(state, phase_error(v_pcc, state.theta), params, base))
}

/// Normalised phase detector output for `v` seen from a frame at `theta`.
pub fn phase_error(v: DqPair, theta: f64) -> f64 {
    v.rotate(-theta).q / v.magnitude().max(NORM_FLOOR)
}

/// Loop-filter rates and frequency estimate for a given phase error. With
/// `error = 0` the PLL coasts at its integrator frequency.
pub fn pll_output(state: &PllState, error: f64, params: &PllParams, base: &PerUnitBase) -> PllOutput {
    let slip = state.omega_int + params.kp * error;
    PllOutput {
        dtheta: slip,
        domega_int: params.ki * error,
        theta: state.theta,
        f_pll: base.f_base() + slip / TAU,
        error,
    }
}

/// Small-signal angle tracking `G_PLL(s) = (kp·s + ki)/(s² + kp·s + ki)`.
pub fn pll_linear_model(params: &PllParams) -> LinearModel {
    LinearModel::new(vec![params.ki, params.kp], vec![params.ki, params.kp, 1.0]).expect("PLL model is proper")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn rk4_step(s: &PllState, v: impl Fn(f64) -> DqPair, t: f64, h: f64, p: &PllParams) -> PllState {
        let base = PerUnitBase::table1();
        let f = |st: &PllState, tt: f64| {
            let o = pll_derivative(st, v(tt), p, &base).unwrap();
            (o.dtheta, o.domega_int)
        };
        let add = |st: &PllState, k: (f64, f64), c: f64| PllState {
            theta: st.theta + c * k.0,
            omega_int: st.omega_int + c * k.1,
        };
        let k1 = f(s, t);
        let k2 = f(&add(s, k1, h / 2.0), t + h / 2.0);
        let k3 = f(&add(s, k2, h / 2.0), t + h / 2.0);
        let k4 = f(&add(s, k3, h), t + h);
        PllState {
            theta: s.theta + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            omega_int: s.omega_int + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        }
    }

    #[test]
    fn locked_fixed_point() {
        let base = PerUnitBase::table1();
        let s = PllState {
            theta: 0.4,
            omega_int: 0.0,
        };
        let o = pll_derivative(&s, DqPair::from_polar(1.0, 0.4), &PllParams::table1(), &base).unwrap();
        assert!(o.dtheta.abs() < 1e-12 && o.domega_int.abs() < 1e-9);
        assert!((o.f_pll - 50.0).abs() < 1e-12);
    }

    #[test]
    fn voltage_collapse() {
        let r = pll_derivative(
            &PllState::default(),
            DqPair::new(0.005, 0.0),
            &PllParams::table1(),
            &PerUnitBase::table1(),
        );
        assert!(matches!(r, Err(Error::VoltageCollapse { .. })));
    }

    #[test]
    fn tracks_frequency_step_without_error() {
        let p = PllParams::table1();
        let base = PerUnitBase::table1();
        let slip = TAU * -0.5;
        let v = |t: f64| DqPair::from_polar(1.0, slip * t);
        let mut s = PllState::default();
        let h = 1e-4;
        let n = 80_000;
        for k in 0..n {
            s = rk4_step(&s, v, k as f64 * h, h, &p);
        }
        let o = pll_derivative(&s, v(n as f64 * h), &p, &base).unwrap();
        assert!((o.f_pll - 49.5).abs() < 1e-4, "f_pll = {}", o.f_pll);
    }

    #[test]
    fn ramp_tracking_error_is_alpha_over_ki() {
        let p = PllParams::table1();
        // −1 Hz/s ⇒ angle = −π t²
        let v = |t: f64| DqPair::from_polar(1.0, -std::f64::consts::PI * t * t);
        let mut s = PllState::default();
        let h = 1e-4;
        let n = 80_000;
        for k in 0..n {
            s = rk4_step(&s, v, k as f64 * h, h, &p);
        }
        let t = n as f64 * h;
        let err = -std::f64::consts::PI * t * t - s.theta;
        let expected = TAU / p.ki;
        assert!(
            (err.abs() - expected).abs() < 1e-5 * 4.0,
            "err {err}, expected {expected}"
        );
        assert!((expected - 0.00419).abs() < 1e-5);
    }

    #[test]
    fn linear_model_dc_and_rolloff() {
        let m = pll_linear_model(&PllParams::table1());
        assert_eq!(m.dc_gain(), 1.0);
        assert!(m.frequency_response(1e6).unwrap().norm() < 1e-2);
        // direct complex evaluation at 10 Hz
        let s = Complex64::new(0.0, TAU * 10.0);
        let direct = (800.0 * s + 1500.0) / (s * s + 800.0 * s + 1500.0);
        let h = m.frequency_response(TAU * 10.0).unwrap();
        assert!((h.norm() - direct.norm()).abs() <= 0.02 * direct.norm());
    }

    #[test]
    fn nonlinear_matches_linear_step() {
        let p = PllParams::table1();
        let step = 0.01;
        let v = |_t: f64| DqPair::from_polar(1.0, step);
        let h = 1e-5;
        let n = 10_000;
        let mut s = PllState::default();
        let mut sim = Vec::with_capacity(n + 1);
        sim.push(0.0);
        for k in 0..n {
            s = rk4_step(&s, v, k as f64 * h, h, &p);
            sim.push(s.theta / step);
        }
        let grid: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        let lin = pll_linear_model(&p).step_response(&grid).unwrap();
        let rms = (sim.iter().zip(&lin.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / sim.len() as f64).sqrt();
        assert!(rms < 0.02, "rms {rms}");
    }

    proptest! {
        #[test]
        fn invariant_under_common_rotation(
            theta in -10.0..10.0f64, w in -50.0..50.0f64, mag in 0.2..1.5f64,
            ang in -3.0..3.0f64, shift in -20.0..20.0f64,
        ) {
            let p = PllParams::table1();
            let base = PerUnitBase::table1();
            let v = DqPair::from_polar(mag, ang);
            let a = pll_derivative(&PllState { theta, omega_int: w }, v, &p, &base).unwrap();
            let b = pll_derivative(&PllState { theta: theta + shift, omega_int: w }, v.rotate(shift), &p, &base).unwrap();
            prop_assert!((a.dtheta - b.dtheta).abs() < 1e-9);
            prop_assert!((a.domega_int - b.domega_int).abs() < 1e-9);
        }
    }
}
