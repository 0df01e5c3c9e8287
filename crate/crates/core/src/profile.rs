use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One constant-slope stretch of a frequency trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Hz/s
    pub rocof: f64,
    /// s
    pub duration: f64,
}

/// Piecewise-linear grid frequency: start at `f0`, follow the segments in
/// order, then hold the final value forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileFields", into = "ProfileFields")]
pub struct FrequencyProfile {
    f0: f64,
    segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFields {
    f0: f64,
    /// `[rocof, duration]` pairs
    segments: Vec<[f64; 2]>,
}

impl TryFrom<ProfileFields> for FrequencyProfile {
    type Error = Error;
    fn try_from(p: ProfileFields) -> Result<Self> {
        FrequencyProfile::new(
            p.f0,
            p.segments
                .into_iter()
                .map(|[rocof, duration]| Segment { rocof, duration })
                .collect(),
        )
    }
}

impl From<FrequencyProfile> for ProfileFields {
    fn from(p: FrequencyProfile) -> Self {
        ProfileFields {
            f0: p.f0,
            segments: p.segments.iter().map(|s| [s.rocof, s.duration]).collect(),
        }
    }
}

/// Sanity band around `f0`.
pub const MAX_EXCURSION_HZ: f64 = 10.0;

impl FrequencyProfile {
    pub fn new(f0: f64, segments: Vec<Segment>) -> Result<Self> {
        if !(f0.is_finite() && f0 > 0.0) {
            return Err(Error::InvalidParameter(format!("f0 must be positive, got {f0}")));
        }
        let mut f = f0;
        for (k, s) in segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration >= 0.0) || !s.rocof.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "segment {k}: duration must be finite and >= 0, rocof finite"
                )));
            }
            f += s.rocof * s.duration;
            if (f - f0).abs() > MAX_EXCURSION_HZ + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "segment {k} drives frequency to {f} Hz, outside f0 ± {MAX_EXCURSION_HZ} Hz"
                )));
            }
        }
        Ok(Self { f0, segments })
    }

    /// Constant frequency.
    pub fn flat(f0: f64) -> Self {
        Self::new(f0, Vec::new()).expect("flat profile is valid")
    }

    /// Hold `f0` for `start` seconds, then ramp at `rocof` until `f_target`.
    pub fn ramp_to(f0: f64, start: f64, rocof: f64, f_target: f64) -> Result<Self> {
        let df = f_target - f0;
        if rocof == 0.0 || df == 0.0 || df.signum() != rocof.signum() {
            return Err(Error::InvalidParameter(format!(
                "rocof {rocof} Hz/s cannot reach {f_target} Hz from {f0} Hz"
            )));
        }
        Self::new(
            f0,
            vec![
                Segment {
                    rocof: 0.0,
                    duration: start,
                },
                Segment {
                    rocof,
                    duration: df / rocof,
                },
            ],
        )
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Time at which the final hold begins.
    pub fn end_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn final_frequency(&self) -> f64 {
        self.f0 + self.segments.iter().map(|s| s.rocof * s.duration).sum::<f64>()
    }

    /// Start time of the first segment with nonzero slope, if any.
    pub fn event_start(&self) -> Option<f64> {
        let mut t = 0.0;
        for s in &self.segments {
            if s.rocof != 0.0 && s.duration > 0.0 {
                return Some(t);
            }
            t += s.duration;
        }
        None
    }

    /// Largest absolute slope over all segments.
    pub fn max_abs_rocof(&self) -> f64 {
        self.segments.iter().map(|s| s.rocof.abs()).fold(0.0, f64::max)
    }

    /// Replace the slope of every ramp segment by `rocof`, keeping the
    /// frequency change of each segment (durations are rescaled).
    pub fn with_ramp_rate(&self, rocof: f64) -> Result<Self> {
        let mut segments = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            if s.rocof == 0.0 {
                segments.push(*s);
                continue;
            }
            let df = s.rocof * s.duration;
            if rocof == 0.0 || (df != 0.0 && df.signum() != rocof.signum()) {
                return Err(Error::InvalidParameter(format!(
                    "rocof {rocof} Hz/s has the wrong sign for a {df:+} Hz ramp"
                )));
            }
            segments.push(Segment {
                rocof,
                duration: df / rocof,
            });
        }
        Self::new(self.f0, segments)
    }

    /// Frequency (Hz) and slope (Hz/s) at time `t`. Negative times evaluate as `t = 0`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let t = t.max(0.0);
        let mut start = 0.0;
        let mut f = self.f0;
        for s in &self.segments {
            let end = start + s.duration;
            if t < end {
                return (f + s.rocof * (t - start), s.rocof);
            }
            f += s.rocof * s.duration;
            start = end;
        }
        (f, 0.0)
    }
}

/// Free-function form of [`FrequencyProfile::eval`].
pub fn eval_profile(profile: &FrequencyProfile, t: f64) -> (f64, f64) {
    profile.eval(t)
}
