//! Units, grids, the sech driving pulse and its conformal-time map.
//!
//! Times are in femtoseconds, angular frequencies in rad/fs, and hbar = 1.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// `arcsech(1/2)`, written as `ln(2 + sqrt 3)`.
pub fn arcsech_half() -> f64 {
    (2.0 + 3.0.sqrt()).ln()
}

/// Converts an ordinary frequency in THz to an angular frequency in rad/fs.
pub fn thz_to_rad_fs(f_thz: f64) -> f64 {
    2.0 * PI * f_thz * 1e-3
}

/// Converts an angular frequency in rad/fs back to THz.
pub fn rad_fs_to_thz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e-3)
}

/// The sech-shaped drive of the squeezing crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivingPulse {
    /// Peak field; only used for plotting because the strength lives in `r_eff`.
    pub amplitude_scale: f64,
    pub fwhm_fs: f64,
    pub gamma: f64,
    pub r_eff: f64,
}

impl DrivingPulse {
    pub fn new(fwhm_fs: f64, r_eff: f64) -> Result<Self> {
        if !(fwhm_fs > 0.0) || !fwhm_fs.is_finite() {
            return Err(Error::InvalidParameter { name: "fwhm_fs", reason: "must be positive" });
        }
        if !(r_eff >= 0.0) || !r_eff.is_finite() {
            return Err(Error::InvalidParameter { name: "r_eff", reason: "must be non-negative" });
        }
        Ok(Self { amplitude_scale: 1.0, fwhm_fs, gamma: 2.0 * arcsech_half() / fwhm_fs, r_eff })
    }

    /// Field amplitude `E0 sech(Gamma t)`.
    pub fn field(&self, t: f64) -> f64 {
        self.amplitude_scale / (self.gamma * t).cosh()
    }

    /// Conformal time `tau(t) = asinh(sinh(Gamma t) + r_eff) / Gamma`.
    pub fn conformal_time(&self, t: f64) -> f64 {
        ((self.gamma * t).sinh() + self.r_eff).asinh() / self.gamma
    }

    /// Inverse map `tau^-1(t) = asinh(sinh(Gamma t) - r_eff) / Gamma`.
    pub fn conformal_time_inverse(&self, t: f64) -> f64 {
        ((self.gamma * t).sinh() - self.r_eff).asinh() / self.gamma
    }

    /// `d tau / dt = cosh(Gamma t) / cosh(Gamma tau(t))`.
    pub fn conformal_derivative(&self, t: f64) -> f64 {
        (self.gamma * t).cosh() / (self.gamma * self.conformal_time(t)).cosh()
    }

    /// `tau^-1(t) - t`, evaluated without cancellation in the tails.
    pub fn inverse_deviation(&self, t: f64) -> f64 {
        asinh_difference((self.gamma * t).sinh(), -self.r_eff) / self.gamma
    }

    /// `tau(t) - t`.
    pub fn forward_deviation(&self, t: f64) -> f64 {
        asinh_difference((self.gamma * t).sinh(), self.r_eff) / self.gamma
    }
}

/// `asinh(s + d) - asinh(s)`, stable when `|s| >> |d|`.
fn asinh_difference(s: f64, d: f64) -> f64 {
    let a = s + d;
    if a * s <= 0.0 {
        return a.asinh() - s.asinh();
    }
    // asinh x - asinh y = asinh(x sqrt(1+y^2) - y sqrt(1+x^2)), with the
    // difference rationalised to avoid the subtraction of two large terms.
    let ca = (1.0 + a * a).sqrt();
    let cs = (1.0 + s * s).sqrt();
    let num = (a - s) * (a + s);
    let arg = num / (a * cs + s * ca);
    arg.asinh()
}

/// Uniform time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_min_fs: f64,
    pub t_max_fs: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t_min_fs: f64, t_max_fs: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter { name: "n", reason: "time grid needs two points" });
        }
        if !(t_max_fs > t_min_fs) {
            return Err(Error::InvalidParameter { name: "t_max_fs", reason: "must exceed t_min_fs" });
        }
        Ok(Self { t_min_fs, t_max_fs, n })
    }

    /// Symmetric window `[-half, half]` with spacing at most `max_step`.
    pub fn symmetric(half_width_fs: f64, max_step_fs: f64) -> Result<Self> {
        let n = (2.0 * half_width_fs / max_step_fs).ceil() as usize + 1;
        Self::new(-half_width_fs, half_width_fs, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max_fs - self.t_min_fs) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.t_min_fs + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid(self.n, self.spacing())
    }
}

/// Uniform frequency grid with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n: usize,
    pub weights: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, n: usize) -> Result<Self> {
        if !(omega_min > 0.0) {
            return Err(Error::SingularFrequency { omega_min });
        }
        if n < 2 {
            return Err(Error::InvalidParameter { name: "n", reason: "frequency grid needs two points" });
        }
        if !(omega_max > omega_min) {
            return Err(Error::InvalidParameter { name: "omega_max", reason: "must exceed omega_min" });
        }
        let step = (omega_max - omega_min) / (n - 1) as f64;
        Ok(Self { omega_min, omega_max, n, weights: trapezoid(n, step) })
    }

    pub fn from_thz(f_min_thz: f64, f_max_thz: f64, n: usize) -> Result<Self> {
        Self::new(thz_to_rad_fs(f_min_thz), thz_to_rad_fs(f_max_thz), n)
    }

    pub fn spacing(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.omega_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

fn trapezoid(n: usize, step: f64) -> Vec<f64> {
    let mut w = alloc::vec![step; n];
    w[0] = 0.5 * step;
    w[n - 1] = 0.5 * step;
    w
}

/// Numeric tolerances shared across modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub symplectic: f64,
    pub projection: f64,
    pub normalization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { symplectic: 1e-3, projection: 1e-6, normalization: 1e-4 }
    }
}

/// Global simulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// The field normalisation constant C; every normalised quantity is independent of it.
    pub field_norm_constant: f64,
    pub rng_seed: u64,
    pub tolerances: Tolerances,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { field_norm_constant: 1.0, rng_seed: 0, tolerances: Tolerances::default() }
    }
}
