//! Shared squeezer fixture: r_eff = 5, 16 fs drive, 0.1-400 THz on 600 points.
#![allow(dead_code)]

use std::sync::OnceLock;

use subcycle_core::grid::{DrivingPulse, FrequencyGrid};
use subcycle_core::kernel::{bloch_messiah, compute_kernel, kernel_time_grid, BogoliubovKernel, PrincipalModeSet};

pub struct Fixture {
    pub pulse: DrivingPulse,
    pub kernel: BogoliubovKernel,
    pub modes: PrincipalModeSet,
}

pub fn strong() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| build(5.0, 600))
}

pub fn weak() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| build(0.1, 400))
}

fn build(r_eff: f64, n: usize) -> Fixture {
    let pulse = DrivingPulse::new(16.0, r_eff).unwrap();
    let fgrid = FrequencyGrid::from_thz(0.1, 400.0, n).unwrap();
    let tgrid = kernel_time_grid(&fgrid, 120.0).unwrap();
    let kernel = compute_kernel(&pulse, &fgrid, &tgrid).unwrap();
    let modes = bloch_messiah(&kernel, 1e-3).unwrap();
    Fixture { pulse, kernel, modes }
}

/// Normalised overlap `|<a, b>| / (|a| |b|)`.
pub fn overlap(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    ab.abs() / (aa * bb).sqrt()
}
