//! Real polynomials with ascending coefficients: `c[0] + c[1]·s + c[2]·s² + …`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative threshold below which leading coefficients are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(Vec<f64>);

impl Poly {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut p = Poly(coeffs.into());
        p.prune();
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// The Laplace variable `s`.
    pub fn s() -> Self {
        Poly(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        *self.0.last().unwrap_or(&0.0)
    }

    /// Drop leading coefficients that are negligible against the largest one.
    fn prune(&mut self) {
        let scale = self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        while self.0.len() > 1 {
            let last = *self.0.last().unwrap();
            if last.abs() <= PRUNE_TOL * scale {
                self.0.pop();
            } else {
                break;
            }
        }
        if self.0.is_empty() {
            self.0.push(0.0);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let c: Vec<f64> = (0..n)
            .map(|k| self.0.get(k).copied().unwrap_or(0.0) + other.0.get(k).copied().unwrap_or(0.0))
            .collect();
        Poly::new(c)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut c = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Monic copy (leading coefficient 1).
    pub fn monic(&self) -> Poly {
        let lead = self.leading();
        self.scale(1.0 / lead)
    }

    /// Roots from the eigenvalues of the balanced companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        // Companion in upper-Hessenberg form: first row −c[n-1..0]/lead, subdiagonal ones.
        let mut m = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            m[(0, j)] = -self.0[n - 1 - j] / lead;
        }
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        balance(&mut m);
        let mut roots: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        roots
    }

    /// Real polynomial with the given roots (complex roots must come in conjugate pairs).
    pub fn from_roots(roots: &[Complex64], lead: f64) -> Poly {
        let mut acc = vec![Complex64::new(lead, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, c) in acc.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            acc = next;
        }
        Poly::new(acc.into_iter().map(|c| c.re).collect::<Vec<_>>())
    }
}

/// Diagonal similarity scaling (Parlett–Reinsch) so row and column norms are comparable.
fn balance(m: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let g = r / RADIX;
            while cc < g {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            let g = r * RADIX;
            while cc > g {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (cc + r / f) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn arithmetic() {
        let a = Poly::new(vec![1.0, 2.0]);
        let b = Poly::new(vec![3.0, 0.0, 1.0]);
        assert_eq!(a.mul(&b).coeffs(), &[3.0, 6.0, 1.0, 2.0]);
        assert_eq!(a.add(&b).coeffs(), &[4.0, 2.0, 1.0]);
        assert_eq!(b.sub(&b).coeffs(), &[0.0]);
        assert!(b.sub(&b).is_zero());
        assert_eq!(b.eval(2.0), 7.0);
    }

    #[test]
    fn prunes_negligible_leading_terms() {
        let p = Poly::new(vec![1.0, 2.0, 1e-20]);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn roots_of_known_factorization() {
        // (s+1)(s+2)(s²+2s+5) → −1, −2, −1 ± 2j
        let p = Poly::new(vec![1.0, 1.0])
            .mul(&Poly::new(vec![2.0, 1.0]))
            .mul(&Poly::new(vec![5.0, 2.0, 1.0]));
        let r = p.roots();
        assert_eq!(r.len(), 4);
        let expected = [
            Complex64::new(-2.0, 0.0),
            Complex64::new(-1.0, -2.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(-1.0, 2.0),
        ];
        for e in expected {
            assert!(r.iter().any(|x| close(*x, e, 1e-9)), "missing root {e}");
        }
    }

    #[test]
    fn roots_with_wide_spread() {
        // poles that span five decades
        let p = Poly::new(vec![1500.0, 800.0, 1.0]);
        let r = p.roots();
        let disc = (800.0f64 * 800.0 - 4.0 * 1500.0).sqrt();
        let slow = (-800.0 + disc) / 2.0;
        assert!(r.iter().any(|x| (x.re - slow).abs() < 1e-9 * slow.abs()));
    }

    #[test]
    fn from_roots_round_trip() {
        let p = Poly::new(vec![6.0, 11.0, 6.0, 1.0]);
        let q = Poly::from_roots(&p.roots(), 1.0);
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
