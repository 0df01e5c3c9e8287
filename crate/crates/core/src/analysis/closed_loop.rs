//! Small-signal power loops of the hybrid controller.
//!
//! Angles are in rad, power in p.u. The inner cascade is treated as unity.
//! With `δ_g` as the reference the PLL tracks the PCC angle `δ_pcc = g·δ_i`:
//! `θ = G_PLL·g·δ_i`, `δ_i = θ + Δδ`. The plant gives `P = K_s·δ_i`, the power
//! PI closes `Δδ = G_P·(P_ref − G_F·s·θ/ω_b − F·P)` where `G_F` is the
//! inertia/damping block on the PLL frequency and `F` the optional power
//! measurement filter. Solving for `P/P_ref`:
//!
//! `K_s·G_P / (1 − g·G_PLL + g·G_P·G_F·G_PLL·s/ω_b + K_s·G_P·F)`.

use serde::{Deserialize, Serialize};

use super::angle::g_delta_x;
use super::linear::LinearModel;
use super::poly::Poly;
use crate::engine::Scenario;
use crate::error::{Error, Result};
use crate::pll::PllParams;

/// Relative distance under which a pole and a zero are cancelled.
pub const CANCEL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `G_δX = 1`.
    WeakGrid,
    /// `G_δX = 0`.
    StrongGrid,
    /// `G_δX` as given.
    Exact,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" | "weak_grid" => Ok(Regime::WeakGrid),
            "strong" | "strong_grid" => Ok(Regime::StrongGrid),
            "exact" => Ok(Regime::Exact),
            other => Err(Error::InvalidParameter(format!(
                "unknown regime '{other}' (expected weak, strong or exact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    pub kp_p: f64,
    pub ki_p: f64,
    pub pll: PllParams,
    /// Angle-distribution factor used by [`Regime::Exact`].
    pub g: f64,
    /// Angle-to-power gain `u0²/(x + x_g)`, p.u./rad.
    pub k_sync: f64,
    /// Corner of a second-order Butterworth filter on the measured power, Hz.
    pub power_filter_hz: Option<f64>,
    /// Inertia/damping block on the PLL frequency; `None` leaves it out.
    pub support: Option<SupportLoop>,
}

/// `G_F = (h·s/(τ_d·s + 1) + d)/(τ_f·s + 1)` acting on `Δω/ω_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportLoop {
    pub h: f64,
    pub d: f64,
    pub tau_d: f64,
    pub tau_f: f64,
    /// rad/s
    pub omega_b: f64,
}

impl SupportLoop {
    /// `(num, den)` of `G_F`.
    pub fn polys(&self) -> (Poly, Poly) {
        // (h s + d(τ_d s + 1)) / ((τ_d s + 1)(τ_f s + 1))
        let num = Poly::new(vec![self.d, self.h + self.d * self.tau_d]);
        let den = Poly::new(vec![1.0, self.tau_d]).mul(&Poly::new(vec![1.0, self.tau_f]));
        (num, den)
    }
}

impl LoopParams {
    fn validate(&self) -> Result<()> {
        if !(self.k_sync.is_finite() && self.k_sync > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k_sync must be > 0, got {}",
                self.k_sync
            )));
        }
        if !(self.kp_p.is_finite() && self.kp_p > 0.0 && self.ki_p.is_finite() && self.ki_p > 0.0) {
            return Err(Error::InvalidParameter("power PI gains must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.g) {
            return Err(Error::InvalidParameter(format!("g must lie in [0, 1], got {}", self.g)));
        }
        if let Some(sl) = self.support {
            let ok = [sl.h, sl.d, sl.tau_d, sl.tau_f]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0)
                && sl.omega_b.is_finite()
                && sl.omega_b > 0.0;
            if !ok {
                return Err(Error::InvalidParameter(
                    "support block parameters must be >= 0 and ω_b > 0".into(),
                ));
            }
        }
        if let Some(f) = self.power_filter_hz {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "power filter corner must be > 0, got {f}"
                )));
            }
        }
        self.pll.validate()
    }
}

impl LoopParams {
    /// Loop of a scenario's hybrid controller: `K_s` and `g` from the line and
    /// grid reactances, `G_F` included, measurement filter left out.
    pub fn from_scenario(sc: &Scenario) -> Result<Self> {
        let c = &sc.circuit;
        let h = &sc.hybrid;
        Ok(Self {
            kp_p: h.kp_p,
            ki_p: h.ki_p,
            pll: sc.pll,
            g: g_delta_x(c.x_l, c.x_g)?,
            k_sync: k_sync(c.u0, c.x_l, c.x_g),
            power_filter_hz: None,
            support: Some(SupportLoop {
                h: h.h,
                d: h.d,
                tau_d: h.tau_d,
                tau_f: h.tau_f,
                omega_b: sc.base.omega_base(),
            }),
        })
    }
}

/// Angle-to-power gain of a lossless branch of reactance `x` behind the grid.
pub fn k_sync(u0: f64, x: f64, x_g: f64) -> f64 {
    u0 * u0 / (x + x_g)
}

/// `ω_c²/(s² + √2·ω_c·s + ω_c²)` as `(num, den)`.
pub fn butterworth2(corner_hz: f64) -> (Poly, Poly) {
    let wc = std::f64::consts::TAU * corner_hz;
    (
        Poly::constant(wc * wc),
        Poly::new(vec![wc * wc, std::f64::consts::SQRT_2 * wc, 1.0]),
    )
}

/// Closed-loop `P(s)/P*(s)` for the chosen regime, reduced by pole/zero cancellation.
pub fn build_closed_loop(regime: Regime, params: &LoopParams) -> Result<LinearModel> {
    params.validate()?;
    let g = match regime {
        Regime::WeakGrid => 1.0,
        Regime::StrongGrid => 0.0,
        Regime::Exact => params.g,
    };
    let n_pll = Poly::new(vec![params.pll.ki, params.pll.kp]);
    let d_pll = Poly::new(vec![params.pll.ki, params.pll.kp, 1.0]);
    let n_pi = Poly::new(vec![params.ki_p, params.kp_p]);
    let (n_f, d_f) = match params.power_filter_hz {
        Some(f) => butterworth2(f),
        None => (Poly::constant(1.0), Poly::constant(1.0)),
    };
    let (n_g, d_g) = match params.support {
        Some(sl) => sl.polys(),
        None => (Poly::constant(0.0), Poly::constant(1.0)),
    };
    let omega_b = params.support.map_or(1.0, |sl| sl.omega_b);
    // everything multiplied through by s·D_pll·D_g·D_f
    let num = n_pi.mul(&d_pll).mul(&d_g).mul(&d_f).scale(params.k_sync);
    let sync = Poly::s().mul(&d_pll.sub(&n_pll.scale(g))).mul(&d_g).mul(&d_f);
    let support = Poly::s().mul(&n_pi).mul(&n_g).mul(&n_pll).mul(&d_f).scale(g / omega_b);
    let power = n_pi.mul(&n_f).mul(&d_pll).mul(&d_g).scale(params.k_sync);
    let den = sync.add(&support).add(&power);
    let model = LinearModel::from_polys(num, den)?.minreal(CANCEL_TOL);
    if model.num_poly().degree() > model.order() && !model.num_poly().is_zero() {
        return Err(Error::ImproperModel {
            num: model.num_poly().degree(),
            den: model.order(),
        });
    }
    Ok(model)
}

/// Characteristic polynomial of the conventional P-f loop
/// `Δω = (P* − P)/(h·s + d)`, `δ_i = ω_b·Δω/s`, `P = K_s·δ_i`.
pub fn pf_characteristic(h: f64, d: f64, k_sync: f64, omega_b: f64) -> Poly {
    let gf = Poly::new(vec![d, h]);
    // 1 + K_s·ω_b/(s·(h s + d)) = 0
    Poly::s().mul(&gf).add(&Poly::constant(k_sync * omega_b))
}

/// Characteristic polynomial of the weak-grid hybrid loop with the power PI
/// replaced by ideal tracking (`P = P*`) and `G_F = h·s + d` folded onto the
/// converter frequency: `P = P_ref − G_F·Δω`, `Δω = s·δ_i/ω_b`, `P = K_s·δ_i`.
pub fn fp_weak_characteristic(h: f64, d: f64, k_sync: f64, omega_b: f64) -> Poly {
    let gf = Poly::new(vec![d, h]);
    // K_s·δ_i + G_F·s·δ_i/ω_b = P_ref → char poly ω_b·K_s + s·G_F(s), scaled by 1/ω_b
    Poly::constant(k_sync).add(&gf.mul(&Poly::s()).scale(1.0 / omega_b))
}
