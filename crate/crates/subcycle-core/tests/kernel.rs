mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use subcycle_core::grid::{DrivingPulse, FrequencyGrid, TimeGrid};
use subcycle_core::kernel::{bloch_messiah, compute_kernel, field_modes, kernel_time_grid, CMatrix};
use subcycle_core::Error;

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Kernel pair written in the forward variable `s = tau^-1(t)`, where the
/// Jacobian `tau'(s)` carries the squeezing instead of the phase deviation.
fn mirrored_kernel(pulse: &DrivingPulse, fgrid: &FrequencyGrid, half: f64, nt: usize) -> (CMatrix, CMatrix) {
    let w = fgrid.points();
    let n = w.len();
    let ds = 2.0 * half / (nt - 1) as f64;
    let s: Vec<f64> = (0..nt).map(|l| -half + l as f64 * ds).collect();
    let tw: Vec<f64> = (0..nt).map(|l| if l == 0 || l == nt - 1 { 0.5 * ds } else { ds }).collect();
    let dev: Vec<f64> = s.iter().map(|&x| pulse.conformal_time(x) - x).collect();
    let jac: Vec<f64> = s.iter().map(|&x| pulse.conformal_derivative(x)).collect();
    let pref = |i: usize, k: usize| {
        (fgrid.weights[i] * fgrid.weights[k]).sqrt() * (w[k] / w[i]).sqrt() / (2.0 * PI)
    };
    let mut p = CMatrix::identity(n, n);
    let mut q = CMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let mut a = Complex64::new(0.0, 0.0);
            let mut b = Complex64::new(0.0, 0.0);
            for l in 0..nt {
                let ga = cis(-w[k] * dev[l]) * jac[l] - 1.0;
                let gb = cis(w[k] * dev[l]) * jac[l] - 1.0;
                a += cis((w[i] - w[k]) * s[l]) * ga * tw[l];
                b += cis((w[i] + w[k]) * s[l]) * gb * tw[l];
            }
            p[(i, k)] += a * pref(i, k);
            q[(i, k)] = -b * pref(i, k);
        }
    }
    (p, q)
}

#[test]
fn kernel_matches_forward_variable_form() {
    let pulse = DrivingPulse::new(16.0, 1.0).unwrap();
    let fgrid = FrequencyGrid::from_thz(1.0, 200.0, 24).unwrap();
    let tgrid = kernel_time_grid(&fgrid, 200.0).unwrap();
    let k = compute_kernel(&pulse, &fgrid, &tgrid).unwrap();
    let (p, q) = mirrored_kernel(&pulse, &fgrid, 200.0, 12001);
    let dp = (&k.p - &p).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dq = (&k.q - &q).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(dp < 1e-8, "P differs by {dp:e}");
    assert!(dq < 1e-8, "Q differs by {dq:e}");
}

#[test]
fn zero_drive_is_identity_channel() {
    let pulse = DrivingPulse::new(16.0, 0.0).unwrap();
    let fgrid = FrequencyGrid::from_thz(0.1, 200.0, 40).unwrap();
    let tgrid = kernel_time_grid(&fgrid, 100.0).unwrap();
    let k = compute_kernel(&pulse, &fgrid, &tgrid).unwrap();
    assert_eq!(k.p, CMatrix::identity(40, 40));
    assert!(k.q.iter().all(|z| z.norm() == 0.0));
    assert_eq!(k.symplectic_defect(), 0.0);
}

#[test]
fn narrow_window_is_rejected() {
    let pulse = DrivingPulse::new(16.0, 5.0).unwrap();
    let fgrid = FrequencyGrid::from_thz(0.1, 200.0, 40).unwrap();
    let tgrid = TimeGrid::new(-20.0, 20.0, 400).unwrap();
    assert!(matches!(compute_kernel(&pulse, &fgrid, &tgrid), Err(Error::GridTooNarrow { .. })));
}

#[test]
fn symplectic_identity_holds() {
    let f = common::strong();
    assert!(f.kernel.symplectic_defect() < 1e-3, "defect {}", f.kernel.symplectic_defect());
    assert!(f.kernel.cross_defect() < 1e-3, "cross defect {}", f.kernel.cross_defect());
}

#[test]
fn modes_are_orthonormal() {
    let m = &common::strong().modes;
    let (gp, gf) = m.gram();
    let id = CMatrix::identity(m.len(), m.len());
    let ep = (&gp - &id).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ef = (&gf - &id).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(ep < 1e-6 && ef < 1e-6, "{ep:e} {ef:e}");
}

#[test]
fn retained_modes_carry_the_photons() {
    let m = &common::strong().modes;
    assert!(m.len() >= 4);
    assert!(m.truncation_loss() < 1e-3, "loss {}", m.truncation_loss());
    assert!(m.r.windows(2).all(|w| w[0] >= w[1]));
    assert!(m.alignment.iter().all(|&a| a > 0.95));
}

#[test]
fn decomposition_reproduces_kernel() {
    let f = common::weak();
    let res = f.modes.reconstruction_residual(&f.kernel);
    assert!(res < 1e-6, "residual {res:e}");
}

#[test]
fn largest_component_has_positive_real_part() {
    let m = &common::strong().modes;
    for j in 0..m.len() {
        let row = m.psi.row(j);
        let big = row.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        assert!(big.re > 0.0, "mode {j}");
    }
}

#[test]
fn field_modes_obey_parseval() {
    let m = &common::strong().modes;
    let c = 1.7;
    // One full period of the discrete transform, so the time sum is exact.
    let period = 2.0 * PI / m.grid.spacing();
    let nt = 4 * m.grid.n;
    let dt = period / nt as f64;
    let tgrid = TimeGrid::new(-0.5 * period, -0.5 * period + (nt - 1) as f64 * dt, nt).unwrap();
    let alpha = field_modes(m, &tgrid, c);
    let w = m.grid.points();
    for j in 0..m.len() {
        let time: f64 = alpha.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>() * dt;
        let freq: f64 = (0..w.len()).map(|i| (m.grid.weights[i] * w[i].sqrt() * m.psi[(j, i)].norm()).powi(2)).sum();
        let freq = c * period * freq;
        assert!((time - freq).abs() < 1e-6 * freq, "mode {j}: {time} vs {freq}");
    }
}

/// Sign changes of `Re(e^{-i phi} z)` above 5% of the peak, with `phi` the
/// phase at the peak.
fn nodes(z: &[Complex64]) -> usize {
    let peak = z.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    let rot = peak.conj() / peak.norm();
    let x: Vec<f64> = z.iter().map(|v| (v * rot).re).filter(|v| v.abs() > 0.05 * peak.norm()).collect();
    x.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

#[test]
fn leading_field_mode_follows_the_drive() {
    let f = common::strong();
    let tgrid = TimeGrid::new(-60.0, 60.0, 1201).unwrap();
    let alpha = field_modes(&f.modes, &tgrid, 1.0);
    let t = tgrid.points();
    let env: Vec<f64> = t.iter().map(|&x| f.pulse.field(f.pulse.conformal_time(x))).collect();
    let a1: Vec<f64> = alpha.row(0).iter().map(|z| z.norm()).collect();
    // Frozen from the 600-point build (0.9725); higher modes take the rest.
    let ov = common::overlap(&a1, &env);
    assert!(ov > 0.97, "overlap {ov}");
    let a1c: Vec<Complex64> = alpha.row(0).iter().cloned().collect();
    let a4c: Vec<Complex64> = alpha.row(3).iter().cloned().collect();
    assert!(nodes(&a4c) > nodes(&a1c));
}

#[test]
fn threshold_drops_weak_modes() {
    let f = common::strong();
    let loose = bloch_messiah(&f.kernel, 0.1).unwrap();
    assert!(loose.len() < f.modes.len());
    assert!(loose.r.iter().all(|r| r.sinh() >= 0.1));
    assert_eq!(loose.spectrum, f.modes.spectrum);
}
