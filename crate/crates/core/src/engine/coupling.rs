//! Instantaneous PCC voltage seen by the inner cascade.
//!
//! The PCC voltage depends on `di/dt`, which depends on the EMF, which depends
//! on the current reference drawn from the PCC voltage through the virtual
//! admittance. Writing `y` for the unclamped current reference, the loop
//! reduces to `Z_v·y + B·clamp(y) = c` with real `B ≥ 0`, solved here in closed
//! form including the circular limiter.

use num_complex::Complex64;

use crate::control::InnerParams;
use crate::dq::DqPair;
use crate::plant::CircuitParams;

/// PCC voltage consistent with the inner cascade for the given states.
pub fn consistent_pcc_voltage(
    v_ref: DqPair,
    i: DqPair,
    integ: DqPair,
    delta_g: f64,
    circuit: &CircuitParams,
    inner: &InnerParams,
) -> DqPair {
    let j = Complex64::i();
    let i_c = i.to_complex();
    let u_g = circuit.grid_voltage(delta_g).to_complex();
    let z_v = Complex64::new(inner.r_v, inner.x_v);
    let z_g = Complex64::new(circuit.r_g, circuit.x_g);
    let l_c = circuit.l_f + circuit.x_l;
    let z_c = Complex64::new(circuit.r_f + circuit.r_l, l_c);

    // e_c − v_pcc = Z_c·i + l_c·D with D = (di/dt)/ω_base, and
    // e_c − v_pcc = kp·(clamp(y) − i) + integ + j·x_ff·i
    let m = integ.to_complex() + j * inner.x_ff * i_c - z_c * i_c - inner.kp_i * i_c;
    let b = inner.kp_i * circuit.x_g / l_c;
    let c = v_ref.to_complex() - u_g - z_g * i_c - circuit.x_g / l_c * m;

    let y = solve_clamped(z_v, b, inner.i_lim, c);
    DqPair::from_complex(v_ref.to_complex() - z_v * y)
}

/// Solve `z·y + b·clamp(y, lim) = c` for `y`, where `clamp` scales `y` down to
/// magnitude `lim`, `Re z ≥ 0` and `b ≥ 0`.
pub fn solve_clamped(z: Complex64, b: f64, lim: f64, c: Complex64) -> Complex64 {
    let y0 = c / (z + b);
    if y0.norm() <= lim {
        return y0;
    }
    // y = r·e^{jφ} with r > lim: e^{jφ}·(z·r + b·lim) = c
    let bl = b * lim;
    let zz = z.norm_sqr();
    let disc = (bl * z.re).powi(2) - zz * (bl * bl - c.norm_sqr());
    let r = (-bl * z.re + disc.max(0.0).sqrt()) / zz;
    let w = z * r + bl;
    if w.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    c / w * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::inner_cascade;
    use crate::per_unit::PerUnitBase;
    use crate::plant::{measure_pcc, plant_derivative, PlantState};
    use proptest::prelude::*;

    fn residual(z: Complex64, b: f64, lim: f64, c: Complex64, y: Complex64) -> f64 {
        let clamped = if y.norm() <= lim { y } else { y * (lim / y.norm()) };
        (z * y + clamped * b - c).norm()
    }

    #[test]
    fn zero_limit_leaves_admittance_only() {
        let z = Complex64::new(0.01, 0.05);
        let c = Complex64::new(0.3, -0.2);
        let y = solve_clamped(z, 5.0, 0.0, c);
        assert!((y - c / z).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn solves_the_clamped_equation(
            zr in 0.0..0.5f64, zi in 0.01..0.5f64, b in 0.0..20.0f64, lim in 0.0..2.0f64,
            cr in -3.0..3.0f64, ci in -3.0..3.0f64,
        ) {
            let z = Complex64::new(zr, zi);
            let c = Complex64::new(cr, ci);
            let y = solve_clamped(z, b, lim, c);
            prop_assert!(residual(z, b, lim, c, y) < 1e-9 * (1.0 + c.norm()));
        }

        #[test]
        fn matches_the_plant_reconstruction(
            id in -1.5..1.5f64, iq in -1.5..1.5f64, ang in -1.5..1.5f64, vmag in 0.8..1.2f64,
            gd in -3.0..3.0f64, ind in -0.3..0.3f64, inq in -0.3..0.3f64, lim in 0.0..1.5f64,
        ) {
            let circuit = CircuitParams::table1();
            let inner = InnerParams { i_lim: lim, ..InnerParams::table1() };
            let base = PerUnitBase::table1();
            let i = DqPair::new(id, iq);
            let integ = DqPair::new(ind, inq);
            let v_ref = DqPair::from_polar(vmag, ang + gd);
            let v = consistent_pcc_voltage(v_ref, i, integ, gd, &circuit, &inner);
            let out = inner_cascade(vmag, ang + gd, v, i, &crate::control::InnerState { integ }, &inner);
            let st = PlantState { i, delta_g: gd };
            let rates = plant_derivative(&st, out.e_c, &circuit, 50.0, &base).unwrap();
            let v_back = measure_pcc(&st, &circuit, rates.di_dt, &base);
            prop_assert!((v_back - v).magnitude() < 1e-9, "{:?} vs {:?}", v_back, v);
        }
    }
}
