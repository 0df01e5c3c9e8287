use serde::{Deserialize, Serialize};

/// One output sample. Angles are wrapped to (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub f_grid: f64,
    pub f_pll: f64,
    pub p: f64,
    pub q: f64,
    pub p_ref_eff: f64,
    pub delta_i: f64,
    pub delta_pcc: f64,
    pub delta_g: f64,
    pub i_d: f64,
    pub i_q: f64,
    pub i_mag: f64,
    pub v_pcc_mag: f64,
    pub soc: f64,
    pub sat_power: bool,
    pub sat_current: bool,
}

impl TraceSample {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.f_grid,
            self.f_pll,
            self.p,
            self.q,
            self.p_ref_eff,
            self.delta_i,
            self.delta_pcc,
            self.delta_g,
            self.i_d,
            self.i_q,
            self.i_mag,
            self.v_pcc_mag,
            self.soc,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Uniformly sampled record of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
}

impl Trace {
    pub fn new(samples: Vec<TraceSample>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time span covered, s.
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Sample spacing, s (0 for fewer than two samples).
    pub fn interval(&self) -> f64 {
        if self.samples.len() < 2 {
            0.0
        } else {
            self.duration() / (self.samples.len() - 1) as f64
        }
    }

    pub fn column(&self, f: impl Fn(&TraceSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.column(|s| s.t)
    }

    /// Samples with `t >= t0`.
    pub fn since(&self, t0: f64) -> &[TraceSample] {
        let k = self.samples.partition_point(|s| s.t < t0 - 1e-12);
        &self.samples[k..]
    }

    /// Every `factor`-th sample.
    pub fn decimate(&self, factor: usize) -> Trace {
        Trace::new(self.samples.iter().step_by(factor.max(1)).copied().collect())
    }
}
