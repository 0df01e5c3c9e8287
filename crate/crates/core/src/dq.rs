use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Two-axis quantity in a rotating frame (voltage or current phasor, p.u.).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DqPair {
    pub d: f64,
    pub q: f64,
}

impl DqPair {
    pub const ZERO: DqPair = DqPair { d: 0.0, q: 0.0 };

    pub const fn new(d: f64, q: f64) -> Self {
        Self { d, q }
    }

    pub fn from_polar(magnitude: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(magnitude * c, magnitude * s)
    }

    pub fn magnitude(self) -> f64 {
        self.d.hypot(self.q)
    }

    pub fn angle(self) -> f64 {
        self.q.atan2(self.d)
    }

    pub fn is_finite(self) -> bool {
        self.d.is_finite() && self.q.is_finite()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.d * k, self.q * k)
    }

    /// Multiplication by `j` (90° advance).
    pub fn perp(self) -> Self {
        Self::new(-self.q, self.d)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.d, self.q)
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self::new(c.re, c.im)
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.d - s * self.q, s * self.d + c * self.q)
    }
}

impl Add for DqPair {
    type Output = DqPair;
    fn add(self, rhs: DqPair) -> DqPair {
        DqPair::new(self.d + rhs.d, self.q + rhs.q)
    }
}

impl Sub for DqPair {
    type Output = DqPair;
    fn sub(self, rhs: DqPair) -> DqPair {
        DqPair::new(self.d - rhs.d, self.q - rhs.q)
    }
}

impl Neg for DqPair {
    type Output = DqPair;
    fn neg(self) -> DqPair {
        DqPair::new(-self.d, -self.q)
    }
}

impl Mul<f64> for DqPair {
    type Output = DqPair;
    fn mul(self, k: f64) -> DqPair {
        self.scale(k)
    }
}

/// Rotate `v` by `angle` radians.
pub fn rotate(v: DqPair, angle: f64) -> DqPair {
    v.rotate(angle)
}

/// Circular limiter: scales `v` down to magnitude `limit` keeping its angle.
///
/// Returns the input unchanged (bitwise) when `|v| <= limit`.
pub fn clamp_magnitude(v: DqPair, limit: f64) -> (DqPair, bool) {
    let limit = limit.max(0.0);
    let mag = v.magnitude();
    if mag <= limit {
        (v, false)
    } else {
        let k = limit / mag;
        (v.scale(k), true)
    }
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Unwrap a sequence of wrapped angles so consecutive samples differ by less than π.
pub fn unwrap_angles(wrapped: &[f64]) -> Vec<f64> {
    use std::f64::consts::{PI, TAU};
    let mut out = Vec::with_capacity(wrapped.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &a in wrapped {
        if let Some(p) = prev {
            let jump = a - p;
            if jump > PI {
                offset -= TAU;
            } else if jump < -PI {
                offset += TAU;
            }
        }
        out.push(a + offset);
        prev = Some(a);
    }
    out
}
