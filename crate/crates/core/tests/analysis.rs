use std::f64::consts::{PI, TAU};

use gfmlab::analysis::closed_loop::{build_closed_loop, LoopParams, Regime};
use gfmlab::analysis::linear::{uniform_grid, LinearModel};
use gfmlab::analysis::{analyze_trace, g_delta_x, predict_pcc_angle};
use gfmlab::engine::{find_builtin, run_scenario};
use gfmlab::Scenario;
use proptest::prelude::*;

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

/// Steady-state gain of `m` to `sin(ωt)` from a direct time-domain simulation
/// of the controllable canonical form, fitted over the last few periods.
fn simulated_gain(m: &LinearModel, omega: f64) -> f64 {
    let lead = *m.den().last().unwrap();
    let a: Vec<f64> = m.den().iter().map(|c| c / lead).collect();
    let n = a.len() - 1;
    let mut b: Vec<f64> = m.num().iter().map(|c| c / lead).collect();
    b.resize(n + 1, 0.0);
    let d = b[n];
    let c: Vec<f64> = (0..n).map(|k| b[k] - d * a[k]).collect();
    let f = |x: &[f64], u: f64| -> Vec<f64> {
        let mut dx = vec![0.0; n];
        dx[..n - 1].copy_from_slice(&x[1..n]);
        dx[n - 1] = u - (0..n).map(|k| a[k] * x[k]).sum::<f64>();
        dx
    };
    let h = 1e-3;
    let t_end = 40.0;
    let fit_from = t_end - 4.0 * TAU / omega;
    let mut x = vec![0.0; n];
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let steps = (t_end / h) as usize;
    for k in 0..steps {
        let t = k as f64 * h;
        let u = |t: f64| (omega * t).sin();
        let k1 = f(&x, u(t));
        let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = f(&x2, u(t + 0.5 * h));
        let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = f(&x3, u(t + 0.5 * h));
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = f(&x4, u(t + h));
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t1 = t + h;
        if t1 >= fit_from {
            let y = c.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + d * u(t1);
            let (s, co) = ((omega * t1).sin(), (omega * t1).cos());
            ss += s * s;
            sc += s * co;
            cc += co * co;
            ys += y * s;
            yc += y * co;
        }
    }
    // least squares y ≈ α sin + β cos
    let det = ss * cc - sc * sc;
    let alpha = (ys * cc - yc * sc) / det;
    let beta = (yc * ss - ys * sc) / det;
    alpha.hypot(beta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn frequency_response_matches_time_domain(
        p1 in 0.5f64..20.0,
        p2 in 0.5f64..20.0,
        z in 0.1f64..10.0,
        k in 0.2f64..5.0,
    ) {
        // k (s + z) / ((s + p1)(s + p2))
        let m = LinearModel::new(vec![k * z, k], vec![p1 * p2, p1 + p2, 1.0]).unwrap();
        let w = TAU;
        let analytic = m.frequency_response(w).unwrap().norm();
        let empirical = simulated_gain(&m, w);
        prop_assert!((analytic - empirical).abs() <= 0.05 * empirical, "{analytic} vs {empirical}");
    }
}

#[test]
fn frequency_response_dc_gain() {
    let m = LinearModel::new(vec![3.0, 2.0], vec![6.0, 1.0, 1.0]).unwrap();
    assert_eq!(m.frequency_response(0.0).unwrap().re, 0.5);
    assert_eq!(m.frequency_response(0.0).unwrap().im, 0.0);
}

#[test]
fn angle_distribution_examples() {
    assert!((g_delta_x(0.05, 1.0 / 1.2).unwrap() - 0.9434).abs() < 5e-5);
    assert!((predict_pcc_angle(0.10, 0.02, 0.9434) - 0.09547).abs() < 1e-5);
}

#[test]
fn pcc_angle_prediction_at_fig9_steady_state() {
    let sc = find_builtin("fig9").unwrap().scenario;
    let tr = run_scenario(&sc).unwrap();
    let s = tr.samples.last().unwrap();
    let c = &sc.circuit;
    let g = g_delta_x(c.converter_reactance(), c.x_g).unwrap();
    let rel = wrap(s.delta_i - s.delta_g);
    let predicted = predict_pcc_angle(s.delta_g + rel, s.delta_g, g);
    let err = wrap(s.delta_pcc - predicted).abs();
    let measured_rel = wrap(s.delta_pcc - s.delta_g).abs();
    assert!(
        err <= (0.02 * measured_rel).max(0.005),
        "err {err} rad, δ_pcc − δ_g = {measured_rel}"
    );
}

#[test]
fn weak_grid_model_tracks_engine_step() {
    let sc = Scenario {
        p_ref: 0.5,
        t_end: 2.5,
        p_step: Some([1.0, 0.05]),
        initial_soc: 1.0,
        ..Scenario::table1()
    };
    let tr = run_scenario(&sc).unwrap();
    let after = tr.since(1.0);
    let p0 = after[0].p;
    let measured: Vec<f64> = after.iter().take(1001).map(|s| (s.p - p0) / 0.05).collect();
    let model = build_closed_loop(Regime::WeakGrid, &LoopParams::from_scenario(&sc).unwrap()).unwrap();
    let predicted = model.step_response(&uniform_grid(1.0, 1e-3)).unwrap();
    let rms = (measured
        .iter()
        .zip(&predicted.values)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / measured.len() as f64)
        .sqrt();
    assert!(rms < 0.05, "rms {rms}");
}

#[test]
fn fig7_metrics_flag_loss_of_sync() {
    let tr = run_scenario(&find_builtin("fig7").unwrap().scenario).unwrap();
    let m = analyze_trace(&tr, 1.0).unwrap();
    assert!(!m.sync_held);
    assert!(m.pole_slip_count >= 1);
    assert!(m.oscillation_detected);
}

#[test]
fn metrics_robust_to_decimation() {
    for name in ["fig7", "fig9"] {
        let sc = Scenario {
            output_interval: 5e-4,
            ..find_builtin(name).unwrap().scenario
        };
        let fine = run_scenario(&sc).unwrap();
        let reports: Vec<_> = [1, 2, 4]
            .iter()
            .map(|&k| analyze_trace(&fine.decimate(k), 1.0).unwrap())
            .collect();
        for r in &reports[1..] {
            assert_eq!(r.oscillation_detected, reports[0].oscillation_detected, "{name}");
            assert_eq!(r.sync_held, reports[0].sync_held, "{name}");
            assert_eq!(r.soc_violated, reports[0].soc_violated, "{name}");
            assert!(r.pole_slip_count.abs_diff(reports[0].pole_slip_count) <= 1, "{name}");
        }
    }
}

#[test]
fn linear_models_of_table1_are_stable() {
    let p = LoopParams::from_scenario(&Scenario::table1()).unwrap();
    for r in [Regime::WeakGrid, Regime::StrongGrid, Regime::Exact] {
        let m = build_closed_loop(r, &p).unwrap();
        assert!(m.is_stable(), "{r:?}");
        let v = m.step_response(&uniform_grid(10.0, 1e-2)).unwrap();
        assert!((v.values.last().unwrap() - 1.0).abs() < 1e-3, "{r:?}");
    }
}
