//! Fixed-step RK4 integration of plant, measurement filter, PLL, controller
//! and inner cascade as one continuous state vector. Saturations are applied
//! inside the derivative evaluation; state of charge and the SoC limit latches
//! are advanced once per step outside the RK4 stages.

mod coupling;
mod scenario;
mod trace;

pub use coupling::{consistent_pcc_voltage, solve_clamped};

use std::f64::consts::{SQRT_2, TAU};

use rayon::prelude::*;

pub use scenario::{
    builtin_scenarios, find_builtin, BuiltinScenario, Scenario, EVENT_START, MAX_DT, TABLE1_CURRENT_LIMIT, TAIL,
};
pub use trace::{Trace, TraceSample};

use crate::control::{
    fp_support, gfm_pf_derivative, hybrid_angle, inner_cascade, pi_should_freeze, power_pi_step, qv_voltage_ref,
    saturate_power_ref, ControllerKind, GfmPfState, HybridState, InnerState, PowerLimitCommand,
};
use crate::dq::{wrap_angle, DqPair};
use crate::error::{Error, Result};
use crate::ess::{ess_power_limits, soc_step, update_latches, EssState};
use crate::plant::{compute_power, plant_derivative, PlantState, CURRENT_BOUND};
use crate::pll::{pll_derivative, pll_output, PllState};

/// Length of the continuous state vector.
pub const N_STATES: usize = 14;

/// Names of the entries of the state vector, in order. `ctrl_0, ctrl_1, ctrl_2`
/// hold `(domega, delta_i, unused)` for P-f and `(p_integ, f_meas, df_lag)`
/// for hybrid; `p_f, q_f` are the filtered power measurements seen by the
/// outer controllers and `p_fr, q_fr` their rates.
pub const STATE_NAMES: [&str; N_STATES] = [
    "i_d",
    "i_q",
    "delta_g",
    "theta",
    "omega_int",
    "integ_d",
    "integ_q",
    "ctrl_0",
    "ctrl_1",
    "ctrl_2",
    "p_f",
    "q_f",
    "p_fr",
    "q_fr",
];

const I_D: usize = 0;
const I_Q: usize = 1;
const DELTA_G: usize = 2;
const THETA: usize = 3;
const OMEGA_INT: usize = 4;
const INTEG_D: usize = 5;
const INTEG_Q: usize = 6;
const CTRL_0: usize = 7;
const CTRL_1: usize = 8;
const CTRL_2: usize = 9;
const P_F: usize = 10;
const Q_F: usize = 11;
const P_FR: usize = 12;
const Q_FR: usize = 13;

pub type StateVector = [f64; N_STATES];

/// Algebraic quantities available at one derivative evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    pub f_grid: f64,
    pub f_pll: f64,
    /// Power at the PCC.
    pub p: f64,
    pub q: f64,
    pub p_ref_eff: f64,
    /// Unwrapped, rad.
    pub delta_i: f64,
    /// rad
    pub delta_pcc: f64,
    /// Unwrapped, rad.
    pub delta_g: f64,
    pub i: DqPair,
    pub v_pcc: DqPair,
    pub delta_cmd: f64,
    /// Current reference after the circular limiter.
    pub i_ref_lim: DqPair,
    /// `[p_min, p_max]` applied by the power saturation block.
    pub p_limits: [f64; 2],
    /// Normalised PLL phase error, rad.
    pub pll_error: f64,
    pub sat_power: bool,
    pub sat_current: bool,
}

/// Stepper for one scenario. Time starts at `−pre_roll`.
pub struct Simulator {
    sc: Scenario,
    x: StateVector,
    ess: EssState,
    /// Power window seen by the saturation block; slews toward the target.
    window: (f64, f64),
    step: i64,
    pre_steps: i64,
}

impl Simulator {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let sc = scenario.clone();
        let x = [0.0; N_STATES];
        let ess = update_latches(EssState::new(sc.initial_soc), &sc.ess);
        let pre_steps = (sc.pre_roll / sc.dt).round() as i64;
        let mut sim = Self {
            sc,
            x,
            ess,
            window: (0.0, 0.0),
            step: -pre_steps,
            pre_steps,
        };
        sim.window = sim.power_window();
        Ok(sim)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.sc
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.sc.dt
    }

    pub fn state(&self) -> &StateVector {
        &self.x
    }

    pub fn soc(&self) -> f64 {
        self.ess.soc
    }

    /// Raised-cosine ramp-in of the references over the first half of the pre-roll.
    fn ramp_factor(&self, t: f64) -> f64 {
        if self.pre_steps == 0 {
            return 1.0;
        }
        let ramp = 0.5 * self.sc.pre_roll;
        let x = ((t + self.sc.pre_roll) / ramp).clamp(0.0, 1.0);
        0.5 - 0.5 * (std::f64::consts::PI * x).cos()
    }

    /// Active power reference at `t`, including the optional step.
    fn p_reference(&self, t: f64, ramp: f64) -> f64 {
        let step = match self.sc.p_step {
            Some([t0, dp]) if t >= t0 => dp,
            _ => 0.0,
        };
        self.sc.p_ref * ramp + step
    }

    fn power_window(&self) -> (f64, f64) {
        let rating = self.sc.ess.p_rating;
        let (mut lo, mut hi) = if self.sc.limit_policy {
            ess_power_limits(&self.ess, &self.sc.ess)
        } else {
            (-rating, rating)
        };
        if let Some([a, b]) = self.sc.power_limits {
            if self.sc.limit_policy {
                lo = lo.max(a);
                hi = hi.min(b);
                if lo > hi {
                    // explicit window lies outside the SoC window; the tighter bound wins
                    let m = if a > hi { hi } else { lo };
                    lo = m;
                    hi = m;
                }
            } else {
                lo = a;
                hi = b;
            }
        }
        (lo, hi)
    }

    fn pcc_for(&self, v_mag: f64, delta_i: f64, plant: &PlantState, inner: &InnerState) -> DqPair {
        consistent_pcc_voltage(
            DqPair::from_polar(v_mag, delta_i),
            plant.i,
            inner.integ,
            plant.delta_g,
            &self.sc.circuit,
            &self.sc.inner,
        )
    }

    /// State derivative and outputs at time `t` for state `x`.
    pub fn derivative(&self, t: f64, x: &StateVector) -> Result<(StateVector, Outputs)> {
        let sc = &self.sc;
        let base = &sc.base;
        let (f_grid, _) = sc.profile.eval(t);
        let ramp = self.ramp_factor(t);
        let plant = PlantState {
            i: DqPair::new(x[I_D], x[I_Q]),
            delta_g: x[DELTA_G],
        };
        let pll_state = PllState {
            theta: x[THETA],
            omega_int: x[OMEGA_INT],
        };
        let (p_meas, q_meas) = (x[P_F], x[Q_F]);
        let inner_state = InnerState {
            integ: DqPair::new(x[INTEG_D], x[INTEG_Q]),
        };

        let mut dx = [0.0; N_STATES];
        let (v_pcc, v_mag, delta_i, delta_cmd, cmd) = match sc.controller {
            ControllerKind::PfGfm => {
                let st = GfmPfState {
                    domega: x[CTRL_0],
                    delta_i: x[CTRL_1],
                };
                let p_ref = self.p_reference(t, ramp);
                let rates = gfm_pf_derivative(p_ref, p_meas, &st, &sc.gfm, base);
                dx[CTRL_0] = rates.ddomega;
                dx[CTRL_1] = rates.ddelta_i;
                let v_mag = sc.circuit.u0;
                let v_pcc = self.pcc_for(v_mag, st.delta_i, &plant, &inner_state);
                let cmd = PowerLimitCommand {
                    p_ref,
                    p_min: p_ref,
                    p_max: p_ref,
                    saturated: false,
                };
                (v_pcc, v_mag, st.delta_i, 0.0, cmd)
            }
            ControllerKind::HybridFpQv => {
                let st = hybrid_state(x, 0.0);
                let v_mag = qv_voltage_ref(sc.q_ref * ramp, q_meas, sc.circuit.u0, sc.hybrid.nq);
                let support = fp_support(0.0, &st, &sc.hybrid);
                let cmd = saturate_power_ref(self.p_reference(t, ramp), support.dp, self.window);
                let (delta_cmd, _) = power_pi_step(&cmd, p_meas, &st, &sc.hybrid, false);
                let delta_i = hybrid_angle(pll_state.theta, delta_cmd);
                let v_pcc = self.pcc_for(v_mag, delta_i, &plant, &inner_state);
                (v_pcc, v_mag, delta_i, delta_cmd, cmd)
            }
        };

        let pll = match pll_derivative(&pll_state, v_pcc, &sc.pll, base) {
            Ok(out) => out,
            Err(Error::VoltageCollapse { .. }) => pll_output(&pll_state, 0.0, &sc.pll, base),
            Err(e) => return Err(e),
        };
        let inner = inner_cascade(v_mag, delta_i, v_pcc, plant.i, &inner_state, &sc.inner);
        if sc.controller == ControllerKind::HybridFpQv {
            let st = hybrid_state(x, delta_cmd);
            let freeze = pi_should_freeze(&cmd, p_meas, &st, &sc.hybrid, inner.limiter_active);
            dx[CTRL_0] = power_pi_step(&cmd, p_meas, &st, &sc.hybrid, freeze).1;
            let support = fp_support(base.freq_dev_pu(pll.f_pll), &st, &sc.hybrid);
            dx[CTRL_1] = support.df_meas;
            dx[CTRL_2] = support.ddf_lag;
        }

        let rates = plant_derivative(&plant, inner.e_c, &sc.circuit, f_grid, base)?;
        let (p, q) = compute_power(v_pcc, plant.i);

        dx[I_D] = rates.di_dt.d;
        dx[I_Q] = rates.di_dt.q;
        dx[DELTA_G] = rates.ddelta_g;
        dx[THETA] = pll.dtheta;
        dx[OMEGA_INT] = pll.domega_int;
        dx[INTEG_D] = inner.dinteg.d;
        dx[INTEG_Q] = inner.dinteg.q;
        let wc = TAU * sc.power_filter_hz;
        dx[P_F] = x[P_FR];
        dx[Q_F] = x[Q_FR];
        dx[P_FR] = wc * wc * (p - p_meas) - SQRT_2 * wc * x[P_FR];
        dx[Q_FR] = wc * wc * (q - q_meas) - SQRT_2 * wc * x[Q_FR];

        let out = Outputs {
            f_grid,
            f_pll: pll.f_pll,
            p,
            q,
            p_ref_eff: cmd.p_ref,
            delta_i,
            delta_pcc: v_pcc.angle(),
            delta_g: plant.delta_g,
            i: plant.i,
            v_pcc,
            delta_cmd,
            i_ref_lim: inner.i_ref_lim,
            p_limits: [cmd.p_min, cmd.p_max],
            pll_error: pll.error,
            sat_power: cmd.saturated,
            sat_current: inner.limiter_active,
        };
        Ok((dx, out))
    }

    /// Derivative and outputs at the current state.
    pub fn evaluate(&self) -> Result<(StateVector, Outputs)> {
        self.derivative(self.time(), &self.x)
    }

    /// Advance one RK4 step. SoC (frozen during the pre-roll) integrates the
    /// RK4-weighted PCC power of the step.
    pub fn advance(&mut self) -> Result<()> {
        let h = self.sc.dt;
        let t = self.time();
        let x = self.x;
        let axpy = |a: &StateVector, k: &StateVector, c: f64| {
            let mut out = *a;
            for (o, kk) in out.iter_mut().zip(k) {
                *o += c * kk;
            }
            out
        };
        let (k1, o1) = self.derivative(t, &x)?;
        let (k2, o2) = self.derivative(t + 0.5 * h, &axpy(&x, &k1, 0.5 * h))?;
        let (k3, o3) = self.derivative(t + 0.5 * h, &axpy(&x, &k2, 0.5 * h))?;
        let (k4, o4) = self.derivative(t + h, &axpy(&x, &k3, h))?;
        for i in 0..N_STATES {
            self.x[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if self.step >= 0 {
            let p_avg = (o1.p + 2.0 * o2.p + 2.0 * o3.p + o4.p) / 6.0;
            self.ess = update_latches(soc_step(self.ess, p_avg, h, &self.sc.ess), &self.sc.ess);
        }
        let (lo, hi) = self.power_window();
        let max_move = self.sc.limit_slew * h;
        let slew = |from: f64, to: f64| from + (to - from).clamp(-max_move, max_move);
        self.window = (slew(self.window.0, lo), slew(self.window.1, hi));
        self.step += 1;

        let i_mag = self.x[I_D].hypot(self.x[I_Q]);
        if !self.x.iter().all(|v| v.is_finite()) {
            return Err(self.diverged("non-finite state"));
        }
        if i_mag >= CURRENT_BOUND {
            return Err(self.diverged(&format!("current magnitude {i_mag:.3} p.u.")));
        }
        Ok(())
    }

    fn diverged(&self, reason: &str) -> Error {
        Error::Diverged {
            t: self.time(),
            reason: reason.to_string(),
            partial: Box::default(),
        }
    }

    fn sample(&self) -> Result<TraceSample> {
        let (_, o) = self.evaluate()?;
        Ok(TraceSample {
            t: self.time(),
            f_grid: o.f_grid,
            f_pll: o.f_pll,
            p: o.p,
            q: o.q,
            p_ref_eff: o.p_ref_eff,
            delta_i: wrap_angle(o.delta_i),
            delta_pcc: o.delta_pcc,
            delta_g: wrap_angle(o.delta_g),
            i_d: o.i.d,
            i_q: o.i.q,
            i_mag: o.i.magnitude(),
            v_pcc_mag: o.v_pcc.magnitude(),
            soc: self.ess.soc,
            sat_power: o.sat_power,
            sat_current: o.sat_current,
        })
    }

    /// Run the pre-roll without recording.
    pub fn settle(&mut self) -> Result<()> {
        while self.step < 0 {
            self.advance()?;
        }
        Ok(())
    }
}

fn attach_partial(err: Error, samples: Vec<TraceSample>) -> Error {
    match err {
        Error::Diverged { t, reason, .. } => Error::Diverged {
            t,
            reason,
            partial: Box::new(Trace::new(samples)),
        },
        Error::VoltageCollapse { magnitude } => Error::Diverged {
            t: samples.last().map_or(0.0, |s| s.t),
            reason: format!("PCC voltage collapsed to {magnitude:.4} p.u."),
            partial: Box::new(Trace::new(samples)),
        },
        Error::InvalidParameter(reason) => Error::Diverged {
            t: samples.last().map_or(0.0, |s| s.t),
            reason,
            partial: Box::new(Trace::new(samples)),
        },
        other => other,
    }
}

/// Integrate a scenario and return its trace, sampled every `output_interval`
/// from t = 0 to `t_end`.
pub fn run_scenario(s: &Scenario) -> Result<Trace> {
    let mut sim = Simulator::new(s)?;
    let n_samples = s.sample_count();
    let decim = s.decimation();
    let mut samples = Vec::with_capacity(n_samples);
    if let Err(e) = sim.settle() {
        return Err(attach_partial(e, samples));
    }
    for k in 0..n_samples {
        if k > 0 {
            for _ in 0..decim {
                if let Err(e) = sim.advance() {
                    return Err(attach_partial(e, samples));
                }
            }
        }
        match sim.sample() {
            Ok(sample) if sample.is_finite() => samples.push(sample),
            Ok(_) => return Err(attach_partial(sim.diverged("non-finite output"), samples)),
            Err(e) => return Err(attach_partial(e, samples)),
        }
    }
    Ok(Trace::new(samples))
}

/// Run independent scenarios concurrently, at most `threads` at a time
/// (`None` uses the global pool). Results keep the input order.
pub fn run_batch(scenarios: &[Scenario], threads: Option<usize>) -> Vec<Result<Trace>> {
    let work = || scenarios.par_iter().map(run_scenario).collect::<Vec<_>>();
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(_) => scenarios.iter().map(run_scenario).collect(),
        },
        None => work(),
    }
}

fn hybrid_state(x: &StateVector, delta_cmd: f64) -> HybridState {
    HybridState {
        p_integ: x[CTRL_0],
        f_meas: x[CTRL_1],
        df_lag: x[CTRL_2],
        delta_cmd,
    }
}
