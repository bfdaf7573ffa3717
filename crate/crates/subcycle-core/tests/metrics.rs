mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use subcycle_core::detection::{project_modes, GatingFunction};
use subcycle_core::grid::SimConfig;
use subcycle_core::metrics::*;
use subcycle_core::phase_space::{covariance_from_thetas, gaussian_trwf, Axis, GaussianState, WignerGrid};
use subcycle_core::Error;

#[test]
fn vacuum_reference_values() {
    let vac = GaussianState::vacuum();
    let e = squeeze_ellipse(&vac, 1.5);
    assert_eq!((e.v_min, e.v_max, e.angle, e.t_d), (0.5, 0.5, 0.0, 1.5));
    assert_eq!(metrological_power(&vac), 0.0);
    assert_eq!(thermal_photon_number(&e, 1e-9).unwrap(), 0.0);
    let ax = Axis::centered(3.0, 61);
    let w = WignerGrid::from_fn(ax, ax, |x, p| vac.density(x, p));
    assert!((w.origin_value() - 1.0 / PI).abs() < 1e-15);
}

#[test]
fn squeezed_vacuum_is_pure() {
    let st = covariance_from_thetas(&[Complex64::from_polar(1.0, 0.4)], 0.0, &[0.3]);
    let e = squeeze_ellipse(&st, 0.0);
    assert!((e.v_min - 0.5 * (-0.6f64).exp()).abs() < 1e-14);
    assert!((e.angle - 0.4).abs() < 1e-12);
    assert!(thermal_photon_number(&e, 1e-9).unwrap() < 1e-12);
    assert!((metrological_power(&st) - 0.5 * (2.0 * 0.6f64.exp() - 2.0)).abs() < 1e-12);
}

#[test]
fn thermal_occupation_is_recovered() {
    let n = 0.37;
    let st = GaussianState::new([[n + 0.5, 0.0], [0.0, n + 0.5]]);
    assert!((thermal_photon_number(&squeeze_ellipse(&st, 0.0), 1e-9).unwrap() - n).abs() < 1e-14);
    let bad = EllipseParams { v_max: 0.5, v_min: 0.4, angle: 0.0, t_d: 0.0 };
    assert!(matches!(thermal_photon_number(&bad, 1e-6), Err(Error::UnphysicalCovariance { .. })));
}

#[test]
fn small_squeezing_estimate() {
    let (r1, r2) = (0.01, 0.004);
    let (a, b) = (Complex64::from_polar(0.7, 0.2), Complex64::from_polar(0.4, 1.1));
    // Single mode: 1/2 - T r + T r^2 is the expansion of (1 - T(1 - e^{-2r}))/2.
    let t = a.norm_sqr();
    let single = covariance_from_thetas(&[a], (1.0 - t).sqrt(), &[r1]).eigenvalues().0;
    let approx = vmin_approx(t, 0.0, r1, 0.0, a, Complex64::new(0.0, 0.0));
    assert!((approx - (0.5 - t * r1 + t * r1 * r1)).abs() < 1e-15);
    assert!((approx - single).abs() < 1e-6);
    let tv = (1.0 - a.norm_sqr() - b.norm_sqr()).sqrt();
    let exact = covariance_from_thetas(&[a, b], tv, &[r1, r2]).eigenvalues().0;
    let approx = vmin_approx(a.norm_sqr(), b.norm_sqr(), r1, r2, a, b);
    assert!((approx - exact).abs() < 1e-5, "{approx} vs {exact}");
}

#[test]
fn angular_velocity_of_a_ramp() {
    let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
    let wrapped: Vec<f64> = t.iter().map(|x| { let a = 0.3 * x; a - PI * ((a + PI / 2.0) / PI).floor() }).collect();
    let v = angular_velocity(&t, &wrapped);
    assert!(v.iter().all(|x| (x - 0.3).abs() < 1e-12));
}

#[test]
fn extrema() {
    let t = [-2.0, -1.0, 0.0, 1.0];
    assert_eq!(peak(&t, &[0.1, 0.5, 0.2, 0.4]), (-1.0, 0.5));
    assert_eq!(negativity_trace(&t, &[0.1, -0.5, -0.7, 0.4]), (0.0, -0.7));
}

#[test]
fn longer_gates_lose_metrological_power() {
    let f = common::strong();
    let delays: Vec<f64> = (0..=400).map(|i| -30.0 + 0.1 * i as f64).collect();
    let peaks: Vec<f64> = [24.5, 35.0, 50.0]
        .iter()
        .map(|&d| {
            let proj = project_modes(&f.modes, &GatingFunction::new(d).unwrap(), &delays, &SimConfig::default()).unwrap();
            let m: Vec<f64> = (0..delays.len()).map(|k| metrological_power(&gaussian_trwf(&proj, &f.modes.r, k))).collect();
            peak(&delays, &m).1
        })
        .collect();
    assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2], "{peaks:?}");
}

fn covariance() -> impl Strategy<Value = GaussianState> {
    (0.05f64..3.0, 0.0f64..2.0, -PI..PI).prop_map(|(a, b, phi)| {
        // Rotated diag(a, 1/(4a) + b) always satisfies det >= 1/4.
        let (v1, v2) = (a, 0.25 / a + b);
        let (s, c) = phi.sin_cos();
        GaussianState::new([[c * c * v1 + s * s * v2, c * s * (v1 - v2)], [c * s * (v1 - v2), s * s * v1 + c * c * v2]])
    })
}

proptest! {
    #[test]
    fn power_flags_squeezing(st in covariance()) {
        let e = squeeze_ellipse(&st, 0.0);
        prop_assert!(e.v_max >= e.v_min && e.v_min > 0.0);
        prop_assert!(e.angle > -PI / 2.0 && e.angle <= PI / 2.0);
        prop_assert_eq!(metrological_power(&st) > 0.0, e.v_min < V_VAC);
        prop_assert!(thermal_photon_number(&e, 1e-9).unwrap() >= 0.0);
    }

    #[test]
    fn unwrapped_angles_are_continuous(start in -1.5f64..1.5, steps in prop::collection::vec(-1.2f64..1.2, 1..60)) {
        let mut truth = vec![start];
        for s in &steps {
            truth.push(truth.last().unwrap() + s);
        }
        let wrapped: Vec<f64> = truth.iter().map(|a| a - PI * ((a + PI / 2.0) / PI).floor()).collect();
        let u = unwrap_angles(&wrapped);
        for (w, x) in u.windows(2).zip(truth.windows(2)) {
            prop_assert!((w[1] - w[0]).abs() <= PI / 2.0 + 1e-12);
            prop_assert!(((w[1] - w[0]) - (x[1] - x[0])).abs() < 1e-9);
        }
    }
}
