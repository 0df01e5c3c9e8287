//! Rational transfer functions in the Laplace variable.

use num_complex::Complex64;
use serde::Serialize;

use super::poly::Poly;
use crate::error::{Error, Result};

/// Largest internal step used by [`LinearModel::step_response`].
pub const MAX_STEP: f64 = 1e-4;

/// `num(s)/den(s)`, coefficients in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    num: Poly,
    den: Poly,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepResponse {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    /// False when any pole has a non-negative real part.
    pub stable: bool,
}

impl LinearModel {
    pub fn new(num: impl Into<Vec<f64>>, den: impl Into<Vec<f64>>) -> Result<Self> {
        Self::from_polys(Poly::new(num), Poly::new(den))
    }

    pub fn from_polys(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() || !den.coeffs().iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParameter("denominator must be nonzero and finite".into()));
        }
        if !num.coeffs().iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParameter("numerator must be finite".into()));
        }
        if !num.is_zero() && num.degree() > den.degree() {
            return Err(Error::ImproperModel {
                num: num.degree(),
                den: den.degree(),
            });
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> &[f64] {
        self.num.coeffs()
    }

    pub fn den(&self) -> &[f64] {
        self.den.coeffs()
    }

    pub fn num_poly(&self) -> &Poly {
        &self.num
    }

    pub fn den_poly(&self) -> &Poly {
        &self.den
    }

    pub fn order(&self) -> usize {
        self.den.degree()
    }

    pub fn dc_gain(&self) -> f64 {
        self.num.coeffs()[0] / self.den.coeffs()[0]
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        if self.num.is_zero() {
            Vec::new()
        } else {
            self.num.roots()
        }
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < 0.0)
    }

    /// Same model with both polynomials scaled so the denominator is monic.
    pub fn normalized(&self) -> LinearModel {
        let lead = self.den.leading();
        LinearModel {
            num: self.num.scale(1.0 / lead),
            den: self.den.scale(1.0 / lead),
        }
    }

    /// Cancel pole/zero pairs closer than `tol` (relative to their magnitude).
    pub fn minreal(&self, tol: f64) -> LinearModel {
        if self.num.is_zero() {
            return LinearModel {
                num: Poly::constant(0.0),
                den: Poly::constant(1.0),
            };
        }
        let mut zeros = self.zeros();
        let mut poles = self.poles();
        let mut k = 0;
        while k < zeros.len() {
            let z = zeros[k];
            let hit = poles.iter().position(|p| (p - z).norm() <= tol * z.norm().max(1.0));
            match hit {
                Some(j) => {
                    zeros.remove(k);
                    poles.remove(j);
                }
                None => k += 1,
            }
        }
        LinearModel {
            num: Poly::from_roots(&zeros, self.num.leading()),
            den: Poly::from_roots(&poles, self.den.leading()),
        }
    }

    /// `num(jω)/den(jω)`.
    pub fn frequency_response(&self, omega: f64) -> Result<Complex64> {
        if !(omega >= 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be >= 0, got {omega}")));
        }
        let s = Complex64::new(0.0, omega);
        let d = self.den.eval_complex(s);
        if d.norm() == 0.0 {
            return Err(Error::PoleOnAxis { omega });
        }
        Ok(self.num.eval_complex(s) / d)
    }

    /// Controllable-canonical realisation `(A, B, C, D)` with `A` as the
    /// last-row companion matrix. Returned as `(a_row, c, d)` where the state
    /// equation is `x_k' = x_{k+1}` for `k < n−1` and
    /// `x_{n−1}' = −Σ a_row[k]·x_k + u`.
    fn canonical(&self) -> (Vec<f64>, Vec<f64>, f64) {
        let n = self.den.degree();
        let lead = self.den.leading();
        let den: Vec<f64> = self.den.coeffs().iter().map(|c| c / lead).collect();
        let mut num: Vec<f64> = self.num.coeffs().iter().map(|c| c / lead).collect();
        num.resize(n + 1, 0.0);
        let d = num[n];
        let c: Vec<f64> = (0..n).map(|k| num[k] - d * den[k]).collect();
        (den[..n].to_vec(), c, d)
    }

    /// Unit-step response sampled at `t_grid` (ascending, starting at or after 0).
    pub fn step_response(&self, t_grid: &[f64]) -> Result<StepResponse> {
        if t_grid.windows(2).any(|w| w[1] < w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
            return Err(Error::InvalidParameter(
                "time grid must be ascending and non-negative".into(),
            ));
        }
        let stable = self.is_stable();
        let (a, c, d) = self.canonical();
        let n = a.len();
        let deriv = |x: &[f64], out: &mut [f64]| {
            if n > 0 {
                out[..n - 1].copy_from_slice(&x[1..n]);
                out[n - 1] = 1.0 - a.iter().zip(x).map(|(ak, xk)| ak * xk).sum::<f64>();
            }
        };
        let output = |x: &[f64]| c.iter().zip(x).map(|(ck, xk)| ck * xk).sum::<f64>() + d;

        let mut x = vec![0.0; n];
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut t = 0.0;
        let mut values = Vec::with_capacity(t_grid.len());
        for &target in t_grid {
            let span = target - t;
            if span > 0.0 {
                let steps = (span / MAX_STEP).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for _ in 0..steps {
                    deriv(&x, &mut k1);
                    for i in 0..n {
                        tmp[i] = x[i] + 0.5 * h * k1[i];
                    }
                    deriv(&tmp, &mut k2);
                    for i in 0..n {
                        tmp[i] = x[i] + 0.5 * h * k2[i];
                    }
                    deriv(&tmp, &mut k3);
                    for i in 0..n {
                        tmp[i] = x[i] + h * k3[i];
                    }
                    deriv(&tmp, &mut k4);
                    for i in 0..n {
                        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    }
                }
                t = target;
            }
            values.push(output(&x));
        }
        Ok(StepResponse {
            t: t_grid.to_vec(),
            values,
            stable,
        })
    }
}

/// Uniform grid `0, dt, 2dt, …, t_end`.
pub fn uniform_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let n = (t_end / dt).round() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_improper_and_empty() {
        assert!(matches!(
            LinearModel::new(vec![0.0, 0.0, 1.0], vec![1.0, 1.0]),
            Err(Error::ImproperModel { .. })
        ));
        assert!(LinearModel::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn first_order_step() {
        let m = LinearModel::new(vec![1.0], vec![1.0, 1.0]).unwrap();
        let r = m.step_response(&[0.0, 1.0]).unwrap();
        assert!(r.stable);
        assert_eq!(r.values[0], 0.0);
        assert!((r.values[1] - (1.0 - (-1.0f64).exp())).abs() < 1e-4);
    }

    #[test]
    fn settles_to_dc_gain() {
        let m = LinearModel::new(vec![2.0, 1.0], vec![2.0, 3.0, 1.0]).unwrap();
        let r = m.step_response(&[20.0]).unwrap();
        assert!((r.values[0] - m.dc_gain()).abs() < 1e-3);
    }

    #[test]
    fn second_order_overshoot() {
        // ζ = 0.1, ω_n = 1
        let m = LinearModel::new(vec![1.0], vec![1.0, 0.2, 1.0]).unwrap();
        let grid = uniform_grid(10.0, 1e-3);
        let r = m.step_response(&grid).unwrap();
        let peak = r.values.iter().cloned().fold(f64::MIN, f64::max);
        let zeta: f64 = 0.1;
        let expected = (-zeta * PI / (1.0 - zeta * zeta).sqrt()).exp();
        assert!(((peak - 1.0) - expected).abs() <= 0.01 * expected);
    }

    #[test]
    fn feedthrough_model() {
        // (s+2)/(s+1): jumps to 1 at 0+, settles to 2
        let m = LinearModel::new(vec![2.0, 1.0], vec![1.0, 1.0]).unwrap();
        let r = m.step_response(&[0.0, 30.0]).unwrap();
        assert_eq!(r.values[0], 1.0);
        assert!((r.values[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn unstable_is_flagged_not_failed() {
        let m = LinearModel::new(vec![1.0], vec![-1.0, 1.0]).unwrap();
        let r = m.step_response(&[0.0, 0.5]).unwrap();
        assert!(!r.stable);
        assert!(r.values[1] > 0.0);
    }

    #[test]
    fn frequency_response_first_order() {
        let m = LinearModel::new(vec![1.0], vec![1.0, 1.0]).unwrap();
        let h = m.frequency_response(1.0).unwrap();
        assert!((h.norm() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((h.arg().to_degrees() + 45.0).abs() < 1e-10);
        let m = LinearModel::new(vec![3.0, 1.0], vec![2.0, 5.0, 1.0]).unwrap();
        assert_eq!(m.frequency_response(0.0).unwrap().re, 1.5);
    }

    #[test]
    fn pole_on_axis_is_an_error() {
        let m = LinearModel::new(vec![1.0], vec![4.0, 0.0, 1.0]).unwrap();
        assert!(matches!(m.frequency_response(2.0), Err(Error::PoleOnAxis { .. })));
        assert!(m.frequency_response(-1.0).is_err());
    }

    #[test]
    fn minreal_cancels_common_factor() {
        // (s+3)(s+1) / ((s+1)(s+2)(s+4))
        let num = Poly::new(vec![3.0, 1.0]).mul(&Poly::new(vec![1.0, 1.0]));
        let den = Poly::new(vec![1.0, 1.0])
            .mul(&Poly::new(vec![2.0, 1.0]))
            .mul(&Poly::new(vec![4.0, 1.0]));
        let m = LinearModel::from_polys(num, den).unwrap().minreal(1e-6);
        assert_eq!(m.order(), 2);
        let expect = [8.0, 6.0, 1.0];
        for (a, b) in m.den().iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
