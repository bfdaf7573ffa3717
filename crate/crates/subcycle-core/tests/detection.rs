mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use subcycle_core::detection::*;
use subcycle_core::grid::{DrivingPulse, SimConfig};
use subcycle_core::phase_space::gaussian_trwf;

fn delays(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

#[test]
fn commutator_integral_closed_form() {
    for &d in &[2.0, 5.8, 18.47, 24.5] {
        let g = GatingFunction::new(d).unwrap();
        let num = commutator_integral(&g, 2.0 * g.band_edge(), 20001);
        let exact = 16f64.ln() / (d * d);
        assert!((num - exact).abs() < 1e-6 * exact, "delta_p = {d}");
    }
}

#[test]
fn normalization_scales_linearly() {
    let g = GatingFunction::new(5.8).unwrap();
    let n1 = gate_normalization(&g, 1.0);
    assert!((n1 - 5.8 / (2.0 * 16f64.ln()).sqrt()).abs() < 1e-14);
    let g2 = GatingFunction::new(11.6).unwrap();
    assert!((gate_normalization(&g2, 1.0) - 2.0 * n1).abs() < 1e-14);
    assert!((gate_normalization(&g, 4.0) - 0.5 * n1).abs() < 1e-14);
}

#[test]
fn detection_mode_is_normalized() {
    // int |G|^2 dw = 1 is [A, A^dag] = 1, i.e. [X, P] = i.
    for &c in &[0.3, 1.0, 7.0] {
        let g = GatingFunction::new(5.8).unwrap();
        let n = 20001;
        let top = 2.0 * g.band_edge();
        let h = top / (n - 1) as f64;
        let s: f64 = (1..n).map(|i| detection_amplitude(&g, c, i as f64 * h, -3.0).norm_sqr() * h).sum();
        assert!((s - 1.0).abs() < 1e-6, "C = {c}: {s}");
    }
}

#[test]
fn leading_mode_peaks_before_the_pulse() {
    let f = common::strong();
    let g = GatingFunction::new(5.8).unwrap();
    let d = delays(-40.0, 40.0, 0.1);
    let proj = project_modes(&f.modes, &g, &d, &SimConfig::default()).unwrap();
    let t1: Vec<f64> = (0..d.len()).map(|k| proj.transmissions[(0, k)]).collect();
    let k = (0..d.len()).max_by(|&a, &b| t1[a].total_cmp(&t1[b])).unwrap();
    assert!((-16.0..=-12.0).contains(&d[k]), "T1 peaks at {}", d[k]);
    for k in 0..d.len() {
        let total = proj.total_transmission(k);
        assert!(total <= 1.0, "sum |theta|^2 = {total} at {}", d[k]);
        assert!((total + proj.theta_vac[k].powi(2) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn modes_decay_away_from_the_pulse() {
    // One-sided spectra that start linearly at zero frequency give theta ~ 1/t_d^2
    // tails rather than exponential ones.
    let f = common::strong();
    let g = GatingFunction::new(5.8).unwrap();
    let d: Vec<f64> = (3..=10).map(|i| i as f64 * 10.0).collect();
    let sym: Vec<f64> = d.iter().map(|t| -t).chain(d.iter().cloned()).collect();
    let proj = project_modes(&f.modes, &g, &sym, &SimConfig::default()).unwrap();
    let n = d.len();
    for side in [0, n] {
        let tot: Vec<f64> = (0..n).map(|k| proj.total_transmission(side + k)).collect();
        assert!(tot.windows(2).all(|w| w[1] < w[0]));
        assert!(tot[n - 1] < 1e-3);
        let slope = (tot[n - 1] / tot[n - 2]).ln() / (d[n - 1] / d[n - 2]).ln();
        assert!((-4.5..=-3.5).contains(&slope), "slope {slope}");
    }
}

#[test]
fn oracle_agrees_with_mode_projection() {
    let f = common::strong();
    let g = GatingFunction::new(5.8).unwrap();
    let d = [-14.0, -5.0, 0.0, 8.0];
    let proj = project_modes(&f.modes, &g, &d, &SimConfig::default()).unwrap();
    for (k, &t) in d.iter().enumerate() {
        let s = gaussian_trwf(&proj, &f.modes.r, k).cov;
        let o = multimode_marginal_oracle(&f.pulse, &g, 1.0, t, OracleSpacing::default()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((s[i][j] - o[i][j]).abs() < 1e-3, "t_d = {t}: {s:?} vs {o:?}");
            }
        }
        let det = o[0][0] * o[1][1] - o[0][1] * o[1][0];
        assert!(det >= 0.25 - 1e-6 && o[0][0] > 0.0);
    }
}

#[test]
fn oracle_sees_vacuum_without_drive() {
    let pulse = DrivingPulse::new(16.0, 0.0).unwrap();
    let g = GatingFunction::new(5.8).unwrap();
    let o = multimode_marginal_oracle(&pulse, &g, 1.0, -3.0, OracleSpacing::default()).unwrap();
    // Midpoint sampling of the detection mode leaves a bias of a few 1e-6.
    assert!((o[0][0] - 0.5).abs() < 1e-5 && (o[1][1] - 0.5).abs() < 1e-5 && o[0][1] == 0.0);
}

#[test]
fn oracle_rejects_coarse_spacing() {
    let pulse = DrivingPulse::new(16.0, 1.0).unwrap();
    let g = GatingFunction::new(5.8).unwrap();
    let r = multimode_marginal_oracle(&pulse, &g, 1.0, 0.0, OracleSpacing { spacing_product: 0.5 });
    assert!(matches!(r, Err(subcycle_core::Error::SpacingViolation { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gate_is_even_with_unit_area(d in 1.0f64..40.0, t in 0.0f64..100.0) {
        let g = GatingFunction::new(d).unwrap();
        prop_assert_eq!(g.response(t), g.response(-t));
        let h = d / 200.0;
        let area: f64 = (-2000..=2000).map(|i| g.response(i as f64 * h) * h).sum();
        prop_assert!((area - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cep_rotates_thetas(phi in -3.0f64..3.0, t in -30.0f64..30.0) {
        let f = common::weak();
        let g = GatingFunction::new(5.8).unwrap();
        let a = project_modes(&f.modes, &g, &[t], &SimConfig::default()).unwrap();
        let b = project_modes(&f.modes, &g.with_cep(phi), &[t], &SimConfig::default()).unwrap();
        for j in 0..f.modes.len() {
            prop_assert!((b.theta[(j, 0)] - a.theta[(j, 0)] * Complex64::from_polar(1.0, phi)).norm() < 1e-12);
            prop_assert!((b.transmissions[(j, 0)] - a.transmissions[(j, 0)]).abs() < 1e-12);
        }
    }
}
