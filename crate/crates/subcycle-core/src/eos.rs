//! Electro-optic sampling with a spectrally filtered near-infrared probe:
//! the probe mode `h(w)`, the THz modes `alpha(W)` and `beta(W)` produced by
//! the conformal-time map, their commutators and the cutoff scan.
//!
//! All quantities are reported relative to the probe shot noise `N`.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{thz_to_rad_fs, DrivingPulse, TimeGrid};
use crate::kernel::{cis, cis_m1, CMatrix, MAX_EDGE_DEVIATION_FS};

/// Gaussian probe `E(w) = i exp(-((w - w_c)/dw)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpectrum {
    pub omega_c: f64,
    pub delta_omega: f64,
}

impl ProbeSpectrum {
    pub fn from_thz(center_thz: f64, width_thz: f64) -> Result<Self> {
        if !(center_thz > 0.0) || !(width_thz > 0.0) {
            return Err(Error::InvalidParameter { name: "probe", reason: "frequencies must be positive" });
        }
        Ok(Self { omega_c: thz_to_rad_fs(center_thz), delta_omega: thz_to_rad_fs(width_thz) })
    }

    pub fn amplitude(&self, omega: f64) -> f64 {
        let x = (omega - self.omega_c) / self.delta_omega;
        (-x * x).exp()
    }

    /// FWHM of the field envelope, `4 sqrt(ln 2) / dw`.
    pub fn duration_fwhm_fs(&self) -> f64 {
        4.0 * LN_2.sqrt() / self.delta_omega
    }
}

/// Low-pass filter `H(w_max - w)`; an infinite cutoff is the unfiltered probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFilter {
    pub omega_max: f64,
}

impl SpectralFilter {
    pub fn new(omega_max: f64) -> Result<Self> {
        if !(omega_max > 0.0) {
            return Err(Error::InvalidParameter { name: "omega_max", reason: "must be positive" });
        }
        Ok(Self { omega_max })
    }

    pub fn unfiltered() -> Self {
        Self { omega_max: f64::INFINITY }
    }

    pub fn passes(&self, omega: f64) -> bool {
        omega <= self.omega_max
    }
}

/// Midpoint grids for the THz band `(0, W_max)` and the NIR band `(W_max, w_top)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EosGrid {
    pub thz: Vec<f64>,
    pub thz_step: f64,
    pub nir: Vec<f64>,
    pub nir_step: f64,
}

impl EosGrid {
    pub fn new(boundary: f64, top: f64, n_thz: usize, n_nir: usize) -> Result<Self> {
        if !(boundary > 0.0) || !(top > boundary) || n_thz == 0 || n_nir == 0 {
            return Err(Error::InvalidParameter { name: "eos grid", reason: "need 0 < boundary < top" });
        }
        let thz_step = boundary / n_thz as f64;
        let nir_step = (top - boundary) / n_nir as f64;
        Ok(Self {
            thz: (0..n_thz).map(|k| (k as f64 + 0.5) * thz_step).collect(),
            thz_step,
            nir: (0..n_nir).map(|k| boundary + (k as f64 + 0.5) * nir_step).collect(),
            nir_step,
        })
    }

    pub fn from_thz(boundary_thz: f64, top_thz: f64, n_thz: usize, n_nir: usize) -> Result<Self> {
        Self::new(thz_to_rad_fs(boundary_thz), thz_to_rad_fs(top_thz), n_thz, n_nir)
    }
}

/// Filter-independent part of the THz modes:
/// `K_a(W, w) = (sqrt W / 2 pi) / sqrt w  int dt e^{i w tau^-1(t) - i W t}` and
/// `K_b(W, w) = -(sqrt W / 2 pi) / sqrt w  int dt e^{-i w tau^-1(t) - i W t}`.
///
/// Since `W < w` on the two bands, the identity part of the map contributes
/// nothing and only `tau^-1(t) - t` enters the time integral.
#[derive(Debug, Clone)]
pub struct EosKernel {
    pub grid: EosGrid,
    pub ka: CMatrix,
    pub kb: CMatrix,
}

pub fn eos_kernel(pulse: &DrivingPulse, grid: &EosGrid, half_width_fs: f64) -> Result<EosKernel> {
    let edge = pulse.inverse_deviation(half_width_fs).abs().max(pulse.inverse_deviation(-half_width_fs).abs());
    if edge > MAX_EDGE_DEVIATION_FS {
        return Err(Error::GridTooNarrow { deviation_fs: edge });
    }
    let w_top = grid.nir.last().copied().unwrap_or(0.0) + grid.thz.last().copied().unwrap_or(0.0);
    let n = (2.0 * half_width_fs * w_top / (PI / 4.0)).ceil() as usize + 1;
    let tg = TimeGrid::new(-half_width_fs, half_width_fs, n)?;
    let t = tg.points();
    let tw = tg.trapezoid_weights();
    let dev: Vec<f64> = t.iter().map(|&tl| pulse.inverse_deviation(tl)).collect();

    let e_thz = CMatrix::from_fn(grid.thz.len(), n, |k, l| cis(-grid.thz[k] * t[l]));
    let fa = CMatrix::from_fn(n, grid.nir.len(), |l, i| {
        let w = grid.nir[i];
        cis(w * t[l]) * cis_m1(w * dev[l]) * tw[l]
    });
    let fb = CMatrix::from_fn(n, grid.nir.len(), |l, i| {
        let w = grid.nir[i];
        cis(-w * t[l]) * cis_m1(-w * dev[l]) * tw[l]
    });
    let scale = |k: usize, i: usize| grid.thz[k].sqrt() / (2.0 * PI) / grid.nir[i].sqrt();
    let mut ka = &e_thz * fa;
    let mut kb = &e_thz * fb;
    for k in 0..grid.thz.len() {
        for i in 0..grid.nir.len() {
            let s = scale(k, i);
            ka[(k, i)] *= s;
            kb[(k, i)] *= -s;
        }
    }
    Ok(EosKernel { grid: grid.clone(), ka, kb })
}

/// Normalised probe mode `h(w)` on the NIR grid and the relative shot noise
/// `N = int |F E|^2 / w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeMode {
    /// Real and non-negative: the `i` of the probe cancels against the conjugation.
    pub h: Vec<f64>,
    pub shot_noise: f64,
}

pub fn probe_mode(probe: &ProbeSpectrum, filter: &SpectralFilter, grid: &EosGrid) -> Result<ProbeMode> {
    let raw: Vec<f64> = grid
        .nir
        .iter()
        .map(|&w| if filter.passes(w) { probe.amplitude(w) / w.sqrt() } else { 0.0 })
        .collect();
    let norm2: f64 = raw.iter().map(|v| v * v).sum::<f64>() * grid.nir_step;
    if !(norm2 > 0.0) {
        return Err(Error::EmptyPassband);
    }
    let norm = norm2.sqrt();
    Ok(ProbeMode { h: raw.iter().map(|v| v / norm).collect(), shot_noise: norm2 })
}

/// THz modes on the THz grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EosModes {
    pub omega: Vec<f64>,
    pub step: f64,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub shot_noise: f64,
}

/// Commutators relative to `N`: `[a,a^dag]/N = int |alpha|^2`,
/// `[b,b^dag]/N = int |beta|^2` and the cross term `int alpha beta^*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commutators {
    pub alpha: f64,
    pub beta: f64,
    pub cross: Complex64,
}

pub fn thz_modes(kernel: &EosKernel, mode: &ProbeMode) -> EosModes {
    let g = &kernel.grid;
    let hv: Vec<f64> = mode.h.iter().map(|h| h * g.nir_step).collect();
    let apply = |k: &CMatrix| -> Vec<Complex64> {
        (0..g.thz.len()).map(|r| (0..g.nir.len()).map(|i| k[(r, i)] * hv[i]).sum()).collect()
    };
    EosModes {
        omega: g.thz.clone(),
        step: g.thz_step,
        alpha: apply(&kernel.ka),
        beta: apply(&kernel.kb),
        shot_noise: mode.shot_noise,
    }
}

impl EosModes {
    pub fn commutators(&self) -> Commutators {
        let s = self.step;
        Commutators {
            alpha: self.alpha.iter().map(|a| a.norm_sqr()).sum::<f64>() * s,
            beta: self.beta.iter().map(|b| b.norm_sqr()).sum::<f64>() * s,
            cross: self.alpha.iter().zip(&self.beta).map(|(a, b)| a * b.conj()).sum::<Complex64>() * s,
        }
    }

    /// Same commutators from the temporal modes over one period `2 pi / dW`
    /// of the midpoint grid.
    pub fn commutators_time_domain(&self) -> Commutators {
        let period = 2.0 * PI / self.step;
        let w_top = self.omega.last().copied().unwrap_or(0.0) + self.step;
        let nt = (period * w_top / PI).ceil() as usize + 1;
        let dt = period / nt as f64;
        let field = |m: &[Complex64], t: f64| -> Complex64 {
            self.omega.iter().zip(m).map(|(w, a)| cis(-w * t) * *a).sum::<Complex64>() * self.step / (2.0 * PI).sqrt()
        };
        let mut c = Commutators { alpha: 0.0, beta: 0.0, cross: Complex64::new(0.0, 0.0) };
        for l in 0..nt {
            let t = l as f64 * dt;
            let a = field(&self.alpha, t);
            let b = field(&self.beta, t);
            c.alpha += a.norm_sqr() * dt;
            c.beta += b.norm_sqr() * dt;
            c.cross += a * b.conj() * dt;
        }
        c
    }

    /// `dS^2(phi)/N = [a,a^dag]/N + [b,b^dag]/N + 2 Re(e^{2 i phi} [a,b^dag]/N)`.
    pub fn vacuum_fluct(&self, phi: f64) -> f64 {
        let c = self.commutators();
        c.alpha + c.beta + 2.0 * (cis(2.0 * phi) * c.cross).re
    }

    /// Peak position and FWHM of `|beta(W)|`, in rad/fs.
    pub fn beta_profile(&self) -> (f64, f64) {
        let mag: Vec<f64> = self.beta.iter().map(|b| b.norm()).collect();
        profile(&self.omega, &mag)
    }
}

/// Peak (parabolic refinement) and full width at half maximum of a sampled curve.
pub fn profile(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = y.len();
    let k = (0..n).fold(0, |b, i| if y[i] > y[b] { i } else { b });
    let peak = if k > 0 && k + 1 < n {
        let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
        let den = a - 2.0 * b + c;
        let off = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
        x[k] + off * (x[k + 1] - x[k])
    } else {
        x[k]
    };
    let half = 0.5 * y[k];
    let cross = |range: &mut dyn Iterator<Item = usize>, dir: isize| -> f64 {
        for i in range {
            let j = (i as isize + dir) as usize;
            if y[j] < half {
                let f = (y[i] - half) / (y[i] - y[j]);
                return x[i] + f * (x[j] - x[i]);
            }
        }
        if dir < 0 {
            x[0]
        } else {
            x[n - 1]
        }
    };
    let lo = cross(&mut (1..=k).rev(), -1);
    let hi = cross(&mut (k..n - 1), 1);
    (peak, hi - lo)
}

/// Waveplate angle to probe phase, `phi = arccos(sqrt(-cos eps))`, defined
/// where `cos eps <= 0`.
pub fn waveplate_phase(eps: f64) -> Result<f64> {
    let c = -eps.cos();
    if c < -1e-12 {
        return Err(Error::InvalidParameter { name: "eps", reason: "needs cos(eps) <= 0" });
    }
    Ok(c.max(0.0).sqrt().acos())
}

/// One row of the cutoff scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub omega_max: f64,
    pub alpha_comm: f64,
    pub beta_comm: f64,
    pub shot_noise: f64,
}

/// Cutoff scan and the cutoff maximising `[b,b^dag]/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterScan {
    pub rows: Vec<ScanRow>,
    pub optimum: f64,
}

pub fn filter_scan(kernel: &EosKernel, probe: &ProbeSpectrum, cutoffs: &[f64]) -> Result<FilterScan> {
    let mut rows = Vec::with_capacity(cutoffs.len());
    for &wc in cutoffs {
        let mode = probe_mode(probe, &SpectralFilter::new(wc)?, &kernel.grid)?;
        let c = thz_modes(kernel, &mode).commutators();
        rows.push(ScanRow { omega_max: wc, alpha_comm: c.alpha, beta_comm: c.beta, shot_noise: mode.shot_noise });
    }
    let best = rows
        .iter()
        .fold(None::<ScanRow>, |b, r| match b {
            Some(b) if b.beta_comm >= r.beta_comm => Some(b),
            _ => Some(*r),
        })
        .ok_or(Error::InvalidParameter { name: "cutoffs", reason: "empty scan" })?;
    Ok(FilterScan { rows, optimum: best.omega_max })
}
