use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use subcycle_core::eos::*;
use subcycle_core::grid::{thz_to_rad_fs, DrivingPulse};
use subcycle_core::Error;

fn grid() -> EosGrid {
    EosGrid::from_thz(130.0, 450.0, 60, 120).unwrap()
}

fn kernel() -> &'static EosKernel {
    static K: OnceLock<EosKernel> = OnceLock::new();
    K.get_or_init(|| eos_kernel(&DrivingPulse::new(16.0, 1.0).unwrap(), &grid(), 100.0).unwrap())
}

fn probe() -> ProbeSpectrum {
    ProbeSpectrum::from_thz(255.0, 33.0).unwrap()
}

/// `K_a` from the forward variable `s = tau^-1(t)`:
/// `int dt e^{i w tau^-1(t) - i W t} = int ds tau'(s) e^{i w s - i W tau(s)}`.
fn ka_forward(pulse: &DrivingPulse, big_w: f64, w: f64) -> Complex64 {
    let half = 150.0;
    let n = 60_001;
    let ds = 2.0 * half / (n - 1) as f64;
    let sum: Complex64 = (0..n)
        .map(|l| {
            let s = -half + l as f64 * ds;
            let wt = if l == 0 || l == n - 1 { 0.5 } else { 1.0 };
            let dev = pulse.conformal_time(s) - s;
            let g = Complex64::from_polar(1.0, -big_w * dev) * pulse.conformal_derivative(s) - 1.0;
            Complex64::from_polar(1.0, (w - big_w) * s) * g * wt * ds
        })
        .sum();
    sum * big_w.sqrt() / (2.0 * PI) / w.sqrt()
}

#[test]
fn kernel_matches_forward_variable_form() {
    let pulse = DrivingPulse::new(16.0, 1.0).unwrap();
    let k = kernel();
    let scale = k.ka.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for &(r, i) in &[(5, 10), (30, 40), (59, 0), (12, 119)] {
        let want = ka_forward(&pulse, k.grid.thz[r], k.grid.nir[i]);
        assert!((k.ka[(r, i)] - want).norm() < 1e-6 * scale, "({r}, {i}): {} vs {want}", k.ka[(r, i)]);
    }
}

#[test]
fn no_drive_no_modes() {
    let k = eos_kernel(&DrivingPulse::new(16.0, 0.0).unwrap(), &grid(), 100.0).unwrap();
    let m = thz_modes(&k, &probe_mode(&probe(), &SpectralFilter::unfiltered(), &k.grid).unwrap());
    assert!(m.alpha.iter().chain(&m.beta).all(|z| z.norm() == 0.0));
}

#[test]
fn commutators_agree_in_both_domains() {
    let k = kernel();
    let mode = probe_mode(&probe(), &SpectralFilter::new(thz_to_rad_fs(240.0)).unwrap(), &k.grid).unwrap();
    let m = thz_modes(k, &mode);
    let f = m.commutators();
    let t = m.commutators_time_domain();
    assert!((f.alpha - t.alpha).abs() < 1e-4 * f.alpha);
    assert!((f.beta - t.beta).abs() < 1e-4 * f.beta);
    assert!((f.cross - t.cross).norm() < 1e-4 * (f.alpha * f.beta).sqrt());
}

#[test]
fn without_beta_the_noise_is_phase_blind() {
    let k = kernel();
    let mut m = thz_modes(k, &probe_mode(&probe(), &SpectralFilter::unfiltered(), &k.grid).unwrap());
    m.beta.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
    let base = m.vacuum_fluct(0.0);
    for i in 1..12 {
        assert!((m.vacuum_fluct(i as f64 * PI / 12.0) - base).abs() < 1e-15 * base);
    }
}

#[test]
fn cutoff_above_the_band_is_unfiltered() {
    let g = grid();
    let a = probe_mode(&probe(), &SpectralFilter::unfiltered(), &g).unwrap();
    let b = probe_mode(&probe(), &SpectralFilter::new(thz_to_rad_fs(500.0)).unwrap(), &g).unwrap();
    assert_eq!(a, b);
    let low = SpectralFilter::new(thz_to_rad_fs(100.0)).unwrap();
    assert!(matches!(probe_mode(&probe(), &low, &g), Err(Error::EmptyPassband)));
}

#[test]
fn scan_picks_the_largest_beta() {
    let cutoffs: Vec<f64> = (0..6).map(|i| thz_to_rad_fs(150.0 + 50.0 * i as f64)).collect();
    let scan = filter_scan(kernel(), &probe(), &cutoffs).unwrap();
    let best = scan.rows.iter().map(|r| r.beta_comm).fold(0.0, f64::max);
    let at = scan.rows.iter().find(|r| r.omega_max == scan.optimum).unwrap();
    assert_eq!(at.beta_comm, best);
    // Shot noise grows as more of the probe passes.
    assert!(scan.rows.windows(2).all(|w| w[1].shot_noise >= w[0].shot_noise));
}

#[test]
fn waveplate_mapping() {
    assert!(waveplate_phase(PI).unwrap().abs() < 1e-12);
    assert!((waveplate_phase(PI / 2.0).unwrap() - PI / 2.0).abs() < 1e-7);
    assert!((waveplate_phase(2.0 * PI / 3.0).unwrap() - 0.5f64.sqrt().acos()).abs() < 1e-12);
    assert!(waveplate_phase(0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probe_mode_is_normalized(cut in 140.0f64..460.0, center in 200.0f64..300.0, width in 10.0f64..60.0) {
        let p = ProbeSpectrum::from_thz(center, width).unwrap();
        let g = grid();
        if let Ok(m) = probe_mode(&p, &SpectralFilter::new(thz_to_rad_fs(cut)).unwrap(), &g) {
            let n: f64 = m.h.iter().map(|h| h * h).sum::<f64>() * g.nir_step;
            prop_assert!((n - 1.0).abs() < 1e-6);
            prop_assert!(m.h.iter().all(|h| *h >= 0.0));
        }
    }
}
