//! The subcycle gate, the detection-mode normalisation and the projection of
//! principal modes onto the sliding detection mode.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{DrivingPulse, SimConfig};
use crate::kernel::{cis, cis_m1, CMatrix, PrincipalModeSet};

/// Gaussian gate `R(t)` of unit area with FWHM `fwhm_fs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatingFunction {
    pub fwhm_fs: f64,
    pub cep_phase: f64,
}

impl GatingFunction {
    pub fn new(fwhm_fs: f64) -> Result<Self> {
        if !(fwhm_fs > 0.0) || !fwhm_fs.is_finite() {
            return Err(Error::InvalidParameter { name: "fwhm_fs", reason: "must be positive" });
        }
        Ok(Self { fwhm_fs, cep_phase: 0.0 })
    }

    pub fn with_cep(self, cep_phase: f64) -> Self {
        Self { cep_phase, ..self }
    }

    pub fn response(&self, t: f64) -> f64 {
        let d = self.fwhm_fs;
        2.0 * LN_2.sqrt() / (PI.sqrt() * d) * (-4.0 * LN_2 * t * t / (d * d)).exp()
    }

    /// Fourier transform `int R(t) e^{i w t} dt`, real because R is even.
    pub fn spectrum(&self, omega: f64) -> f64 {
        let d = self.fwhm_fs;
        (-omega * omega * d * d / (16.0 * LN_2)).exp()
    }

    /// Angular frequency beyond which `R~` is below `e^{-36}`.
    pub fn band_edge(&self) -> f64 {
        (16.0 * LN_2 * 36.0).sqrt() / self.fwhm_fs
    }
}

/// `N = delta_p / sqrt(2 C ln 16)`, which makes `[X, P] = i`.
pub fn gate_normalization(gate: &GatingFunction, c: f64) -> f64 {
    gate.fwhm_fs / (2.0 * c * 16f64.ln()).sqrt()
}

/// `int_0^inf w R~(w)^2 dw` by the trapezoid rule on `[0, omega_max]`.
pub fn commutator_integral(gate: &GatingFunction, omega_max: f64, n: usize) -> f64 {
    let h = omega_max / (n - 1) as f64;
    let f = |w: f64| w * gate.spectrum(w).powi(2);
    let inner: f64 = (1..n - 1).map(|i| f(i as f64 * h)).sum();
    h * (inner + 0.5 * (f(0.0) + f(omega_max)))
}

/// Continuum detection amplitude `G(w) = -sqrt(2) N sqrt(C) sqrt(w) R~(w) e^{-i w t_d} e^{i phi}`,
/// the coefficient of `b(w)` in the detected annihilation operator.
pub fn detection_amplitude(gate: &GatingFunction, c: f64, omega: f64, t_d: f64) -> Complex64 {
    let n = gate_normalization(gate, c);
    cis(gate.cep_phase - omega * t_d) * (-(2.0f64.sqrt()) * n * c.sqrt() * omega.sqrt() * gate.spectrum(omega))
}

/// Projection coefficients of the principal modes over a delay grid.
#[derive(Debug, Clone)]
pub struct DetectionProjection {
    pub delays: Vec<f64>,
    /// `theta_j(t_d)`, mode-major.
    pub theta: CMatrix,
    pub theta_vac: Vec<f64>,
    /// `T_j = |theta_j|^2`.
    pub transmissions: DMatrix<f64>,
    pub norm: f64,
}

impl DetectionProjection {
    pub fn thetas_at(&self, idx: usize) -> Vec<Complex64> {
        self.theta.column(idx).iter().cloned().collect()
    }

    pub fn total_transmission(&self, idx: usize) -> f64 {
        self.transmissions.column(idx).iter().sum()
    }
}

/// `theta_j(t_d) = -i sqrt(2) N int R(t - t_d) alpha_j(t) dt`, evaluated in the
/// frequency domain where the cross-correlation is a product.
pub fn project_modes(
    modes: &PrincipalModeSet,
    gate: &GatingFunction,
    delays: &[f64],
    sim: &SimConfig,
) -> Result<DetectionProjection> {
    let c = sim.field_norm_constant;
    let w = modes.grid.points();
    let m = modes.len();
    let nd = delays.len();
    let mut theta = CMatrix::zeros(m, nd);
    let mut transmissions = DMatrix::zeros(m, nd);
    let mut theta_vac = Vec::with_capacity(nd);

    let weights: Vec<f64> = modes.grid.weights.clone();
    for (k, &t_d) in delays.iter().enumerate() {
        let g: Vec<Complex64> = (0..w.len())
            .map(|i| detection_amplitude(gate, c, w[i], t_d) * weights[i])
            .collect();
        let mut total = 0.0;
        for j in 0..m {
            let th: Complex64 = (0..w.len()).map(|i| g[i] * modes.psi[(j, i)].conj()).sum();
            theta[(j, k)] = th;
            transmissions[(j, k)] = th.norm_sqr();
            total += th.norm_sqr();
        }
        if total > 1.0 + sim.tolerances.projection {
            return Err(Error::GateTooWide { total, t_d_fs: t_d });
        }
        theta_vac.push((1.0 - total).max(0.0).sqrt());
    }
    Ok(DetectionProjection {
        delays: delays.to_vec(),
        theta,
        theta_vac,
        transmissions,
        norm: gate_normalization(gate, c),
    })
}

/// Discretisation of the multimode covariance oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpacing {
    /// `d_omega * delta_d`; must satisfy `1 >> d_omega delta_d >> 1/N`.
    pub spacing_product: f64,
}

impl Default for OracleSpacing {
    fn default() -> Self {
        Self { spacing_product: 0.05 }
    }
}

/// Covariance of the detected quadratures built directly from the multimode
/// Bogoliubov map, without any mode decomposition.
///
/// The detected operator `A = int G(w) b(w) dw` is pulled back to input
/// operators, `A = int alpha(w') a(w') + beta(w') a^dag(w') dw'`, on an input
/// grid wide enough to hold the frequency stretching of the squeezer.
pub fn multimode_marginal_oracle(
    pulse: &DrivingPulse,
    gate: &GatingFunction,
    c: f64,
    t_d: f64,
    spacing: OracleSpacing,
) -> Result<[[f64; 2]; 2]> {
    let dw = spacing.spacing_product / pulse.fwhm_fs;
    let w_out_max = gate.band_edge();
    let stretch = (1.0 + pulse.r_eff * pulse.r_eff).sqrt();
    let w_in_max = 1.2 * stretch * w_out_max;
    let n_out = (w_out_max / dw).ceil() as usize;
    let n_in = (w_in_max / dw).ceil() as usize;

    let product = spacing.spacing_product;
    if !(product <= 0.1) || product * (n_in as f64) < 10.0 {
        return Err(Error::SpacingViolation { product, modes: n_in });
    }

    // Window where tau^-1(t) - t is still above 1e-12 fs.
    let half = if pulse.r_eff > 0.0 {
        ((2.0 * pulse.r_eff / pulse.gamma) / 1e-12).ln() / pulse.gamma
    } else {
        0.0
    };
    let half = half.max(60.0);
    let dt = PI / (2.0 * w_in_max);
    let nt = (2.0 * half / dt).ceil() as usize + 1;
    let dt = 2.0 * half / (nt - 1) as f64;

    let w_out: Vec<f64> = (0..n_out).map(|i| (i as f64 + 0.5) * dw).collect();
    let w_in: Vec<f64> = (0..n_in).map(|i| (i as f64 + 0.5) * dw).collect();
    let g_out: Vec<Complex64> = w_out.iter().map(|&w| detection_amplitude(gate, c, w, t_d)).collect();

    // S(t) = int dw G(w)/sqrt(w) e^{i w t} (e^{i w (tau^-1(t) - t)} - 1)
    let mut s = Vec::with_capacity(nt);
    for l in 0..nt {
        let t = -half + l as f64 * dt;
        let d = pulse.inverse_deviation(t);
        let tw = if l == 0 || l == nt - 1 { 0.5 * dt } else { dt };
        let acc: Complex64 = (0..n_out)
            .map(|i| g_out[i] / w_out[i].sqrt() * cis(w_out[i] * t) * cis_m1(w_out[i] * d))
            .sum();
        s.push((t, acc * dw * tw));
    }

    let mut n_alpha = 0.0;
    let mut n_beta = 0.0;
    let mut aa = Complex64::new(0.0, 0.0);
    for &w in &w_in {
        let mut fwd = Complex64::new(0.0, 0.0);
        let mut bwd = Complex64::new(0.0, 0.0);
        for &(t, v) in &s {
            let e = cis(-w * t);
            fwd += e * v;
            bwd += e.conj() * v;
        }
        let pref = w.sqrt() / (2.0 * PI);
        let alpha = detection_amplitude(gate, c, w, t_d) + fwd * pref;
        let beta = -bwd * pref;
        n_alpha += alpha.norm_sqr() * dw;
        n_beta += beta.norm_sqr() * dw;
        aa += alpha * beta * dw;
    }
    let sxx = 0.5 * (n_alpha + n_beta + 2.0 * aa.re);
    let spp = 0.5 * (n_alpha + n_beta - 2.0 * aa.re);
    let sxp = aa.im;
    Ok([[sxx, sxp], [sxp, spp]])
}
