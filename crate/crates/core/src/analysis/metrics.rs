//! Detectors for loss of synchronization, oscillation and SoC violation.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::Serialize;

use crate::engine::Trace;
use crate::error::{Error, Result};
use crate::ess::EssParams;

/// Trailing peak-to-peak P above which the trace counts as oscillating, p.u.
pub const OSCILLATION_THRESHOLD: f64 = 0.2;
/// Largest PLL-to-grid frequency mismatch tolerated while synchronized, Hz.
pub const SYNC_FREQ_TOL: f64 = 0.1;
/// Margin on the SoC limits before a violation is reported.
pub const SOC_TOL: f64 = 1e-3;
/// Default trailing window, s.
pub const DEFAULT_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub steady_state_mean: f64,
    pub peak_to_peak: f64,
    pub oscillation_detected: bool,
    pub pole_slip_count: u64,
    pub max_power: f64,
    pub soc_final: f64,
    pub soc_violated: bool,
    pub sync_held: bool,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steady_state_mean={}", self.steady_state_mean)?;
        writeln!(f, "peak_to_peak={}", self.peak_to_peak)?;
        writeln!(f, "oscillation_detected={}", self.oscillation_detected)?;
        writeln!(f, "pole_slip_count={}", self.pole_slip_count)?;
        writeln!(f, "max_power={}", self.max_power)?;
        writeln!(f, "soc_final={}", self.soc_final)?;
        writeln!(f, "soc_violated={}", self.soc_violated)?;
        writeln!(f, "sync_held={}", self.sync_held)
    }
}

/// Unwrapped copy of a wrapped angle sequence.
pub fn unwrap_angles(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &a in wrapped {
        if let Some(p) = prev {
            let d = a - p;
            if d > PI {
                offset -= TAU;
            } else if d < -PI {
                offset += TAU;
            }
        }
        prev = Some(a);
        out.push(a + offset);
    }
    out
}

/// [`analyze_trace_with`] using the default SoC limits.
pub fn analyze_trace(tr: &Trace, window: f64) -> Result<MetricsReport> {
    analyze_trace_with(tr, window, &EssParams::table1())
}

/// Metrics over the trailing `window` seconds of `tr`.
///
/// The SoC ceiling is `max(soc_high, initial SoC)`: a run that starts above the
/// high limit only violates it by charging further.
pub fn analyze_trace_with(tr: &Trace, window: f64, ess: &EssParams) -> Result<MetricsReport> {
    let duration = tr.duration();
    if tr.len() < 2 || !(window > 0.0) || window > duration + 1e-9 {
        return Err(Error::WindowTooLong { window, duration });
    }
    let t_end = tr.samples.last().unwrap().t;
    let start = tr.samples.partition_point(|s| s.t < t_end - window - 1e-9);
    let tail = &tr.samples[start..];

    let mean = tail.iter().map(|s| s.p).sum::<f64>() / tail.len() as f64;
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.p), hi.max(s.p))
    });
    let peak_to_peak = hi - lo;

    let rel: Vec<f64> = tr.samples.iter().map(|s| s.delta_i - s.delta_g).collect();
    let rel = unwrap_angles(&rel);
    let slip = (rel[rel.len() - 1] - rel[start]).abs();
    let pole_slip_count = (slip / TAU).floor() as u64;
    let freq_ok = tail.iter().all(|s| (s.f_pll - s.f_grid).abs() < SYNC_FREQ_TOL);

    let soc0 = tr.samples[0].soc;
    let ceiling = ess.soc_high.max(soc0) + SOC_TOL;
    let floor = ess.soc_low.min(soc0) - SOC_TOL;
    let soc_violated = tr.samples.iter().any(|s| s.soc > ceiling || s.soc < floor);

    Ok(MetricsReport {
        steady_state_mean: mean,
        peak_to_peak,
        oscillation_detected: peak_to_peak > OSCILLATION_THRESHOLD,
        pole_slip_count,
        max_power: tr.samples.iter().map(|s| s.p.abs()).fold(0.0, f64::max),
        soc_final: tr.samples.last().unwrap().soc,
        soc_violated,
        sync_held: pole_slip_count == 0 && freq_ok,
    })
}
