//! Cross-module invariants at the reference parameters.

use optomod::classical::{find_periodic_orbit, fixed_point_unmodulated, SettleOptions};
use optomod::config::PipelineSettings;
use optomod::covariance::{steady_periodic_covariance, CovMatrix, CovOptions};
use optomod::metrics::min_quadrature_variance;
use optomod::metrics::Mode;
use optomod::params::{derive, Model, ModulationSpec, SystemParams};
use optomod::perturbative::{classical_orders, covariance_orders};
use optomod::sweep::{run_model, CellStatus};
use proptest::prelude::*;

fn omega_m() -> f64 {
    SystemParams::reference().omega_m
}

fn single(eps: f64, ratio: f64) -> Model {
    Model::reference(ModulationSpec::mechanical(eps, ratio * omega_m())).unwrap()
}

#[test]
fn tighter_tolerance_leaves_orbit_within_settle_tolerance() {
    let m = single(0.2, 2.0);
    let loose = SettleOptions::default();
    let tight = SettleOptions { rtol: loose.rtol / 2.0, ..loose };
    let a = find_periodic_orbit(&m, 64, &loose).unwrap();
    let b = find_periodic_orbit(&m, 64, &tight).unwrap();
    // Each component is measured against its own size along the orbit, so
    // that samples near a zero crossing are not judged on their own value.
    for k in 0..4 {
        let scale = 1.0 + a.component(k).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((_, x), (_, y)) in a.samples.iter().zip(&b.samples) {
            let (x, y) = (x.to_array()[k], y.to_array()[k]);
            assert!((x - y).abs() < loose.tol * scale, "{k}: {x} vs {y}");
        }
    }
}

#[test]
fn unmodulated_orbit_is_the_fixed_point() {
    let m = single(0.0, 2.0);
    let fp = fixed_point_unmodulated(&m).unwrap().to_array();
    let orbit = find_periodic_orbit(&m, 16, &SettleOptions::default()).unwrap();
    for (_, s) in &orbit.samples {
        let s = s.to_array();
        for k in 0..4 {
            assert!((s[k] - fp[k]).abs() <= 1e-8 * fp[k].abs().max(1.0));
        }
    }
}

#[test]
fn covariance_orbit_is_unique_and_symmetric() {
    let m = single(0.2, 2.0);
    let orbit = find_periodic_orbit(&m, 128, &SettleOptions::default()).unwrap();
    let n_th = m.derived.n_thermal;
    let run = |c0: CovMatrix| {
        let opts = CovOptions { initial: Some(c0), ..CovOptions::default() };
        steady_periodic_covariance(&m, &orbit, 128, &opts).unwrap()
    };
    let a = run(CovMatrix::vacuum());
    let b = run(CovMatrix::thermal_mirror(10.0 * n_th));
    let tol = 10.0 * SettleOptions::default().tol;
    for ((_, x), (_, y)) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.matrix(), &x.matrix().transpose());
        let (nu, _) = x.symplectic_eigenvalues();
        assert!(nu >= 0.5 - 1e-9);
        for i in 0..4 {
            for j in 0..4 {
                let (u, v) = (x.get(i, j), y.get(i, j));
                assert!((u - v).abs() < tol * (1.0 + u.abs()), "C{i}{j}: {u} vs {v}");
            }
        }
    }
}

#[test]
fn first_order_misses_the_constant_shift() {
    let eps = 0.2;
    let m = single(eps, 2.0);
    let cl = classical_orders(&m, 2).unwrap();
    let orbit = find_periodic_orbit(&m, 256, &SettleOptions::default()).unwrap();
    let numeric_mean = orbit.component(0).iter().sum::<f64>() / orbit.len() as f64;
    let miss = numeric_mean - cl.component(0, 1).a0;
    let shift = cl.order_term(2, 0).c0;
    // The shift is negative and of order eps² times a few thousand.
    assert!(shift < 0.0 && (shift / (eps * eps)).abs() > 2000.0);
    assert!((miss - shift).abs() < 0.1 * shift.abs(), "{miss} vs {shift}");
}

#[test]
fn covariance_series_matches_unmodulated_steady_state() {
    let m = single(0.0, 2.0);
    let cl = classical_orders(&m, 2).unwrap();
    let cv = covariance_orders(&m, &cl, 2).unwrap();
    let orbit = find_periodic_orbit(&m, 16, &SettleOptions::default()).unwrap();
    let num = steady_periodic_covariance(&m, &orbit, 16, &CovOptions::default()).unwrap();
    let c = num.samples[0].1;
    for i in 0..4 {
        for j in 0..4 {
            assert!((cv.entry(i, j, 2).a0 - c.get(i, j)).abs() < 1e-7);
        }
    }
}

#[test]
fn position_and_momentum_oscillations_cancel_in_the_phonon_number() {
    let m = single(0.2, 2.0);
    let cl = classical_orders(&m, 1).unwrap();
    let cv = covariance_orders(&m, &cl, 1).unwrap();
    let c11 = cv.entry(0, 0, 1).amplitude(1);
    let sum = 2.0 * cv.phonon(1).amplitude(1);
    assert!(sum * 5.0 <= c11, "C11 + C22 first harmonic {sum} vs C11 {c11}");
}

#[test]
fn moderate_modulation_squeezes_like_the_series_predicts() {
    let m = single(0.2, 2.0);
    let out = run_model(&m, &PipelineSettings::default());
    assert_eq!(out.status, CellStatus::Ok);
    let q = out.metrics.unwrap().qvar_min;
    assert!(q < 0.5);
    // The series of the mirror block, minimized over the period, alternates
    // around the numeric value and closes in on it with the order.
    let period = m.period().unwrap();
    let series_min = |order: usize| {
        let cl = classical_orders(&m, order).unwrap();
        let cv = covariance_orders(&m, &cl, order).unwrap();
        (0..512)
            .map(|k| {
                let c = CovMatrix(cv.eval(period * k as f64 / 512.0));
                min_quadrature_variance(&c, Mode::Mirror)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let err: Vec<f64> = [2, 4, 6].iter().map(|&n| (series_min(n) - q).abs()).collect();
    assert!(err[2] < err[1] && err[1] < err[0], "{err:?}");
    assert!(err[2] < 0.01, "pipeline {q}, order-6 error {}", err[2]);
}

#[test]
fn strong_modulation_at_resonance_is_blanked() {
    let out = run_model(&single(0.5, 2.0), &PipelineSettings::default());
    assert_eq!(out.status, CellStatus::Unstable);
    assert!(out.metrics.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coupling_scales_with_inverse_root_mass(scale in 0.1f64..10.0) {
        let r = SystemParams::reference();
        let p = SystemParams { mass: r.mass * scale, ..r };
        let a = derive(&r).unwrap().g0 * r.mass.sqrt();
        let b = derive(&p).unwrap().g0 * p.mass.sqrt();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn derive_is_pure(temp in 1e-3f64..300.0) {
        let p = SystemParams { temperature: temp, ..SystemParams::reference() };
        let a = derive(&p).unwrap();
        let b = derive(&p).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // Stable cells away from the blank region yield physical periodic states.
    #[test]
    fn stable_cells_are_physical(eps in 0.0f64..0.25, ratio in 1.0f64..3.0) {
        let settings = PipelineSettings { samples: 64, ..PipelineSettings::default() };
        let out = run_model(&single(eps, ratio), &settings);
        prop_assert_eq!(out.status, CellStatus::Ok);
        let m = out.metrics.unwrap();
        prop_assert!(m.en_max >= 0.0 && m.d_max >= 0.0);
        prop_assert!(m.qvar_min > 0.0 && m.xvar_min > 0.0);
        prop_assert!(m.n_max >= -1e-9);
    }
}
