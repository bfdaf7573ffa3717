//! Characteristic functions and time-resolved Wigner functions of the
//! detected mode, for the pulsed squeezed and the photon-subtracted state.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::detection::DetectionProjection;
use crate::error::{Error, Result};
use crate::kernel::cis;

pub type Mat2 = [[f64; 2]; 2];

/// Uniform axis `min + i * step`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl Axis {
    /// `n` points spanning `[-half, half]`.
    pub fn centered(half: f64, n: usize) -> Self {
        Self { min: -half, step: 2.0 * half / (n - 1) as f64, n }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn max(&self) -> f64 {
        self.point(self.n - 1)
    }

    pub fn half_width(&self) -> f64 {
        self.min.abs().max(self.max().abs())
    }
}

/// Conjugate axis for a Fourier pair with `x`: wide enough for a Gaussian of
/// smallest variance `v_min` to decay, fine enough that periodic images stay
/// outside `x`.
pub fn conjugate_axis(x: &Axis, v_min: f64) -> Axis {
    let step = PI / (1.25 * x.half_width());
    let half = (60.0 / v_min).sqrt();
    let k = (half / step).ceil() as usize;
    Axis { min: -(k as f64) * step, step, n: 2 * k + 1 }
}

/// Zero-mean Gaussian state of the detected mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub cov: Mat2,
    pub mean: [f64; 2],
}

impl GaussianState {
    pub fn new(cov: Mat2) -> Self {
        Self { cov, mean: [0.0, 0.0] }
    }

    pub fn vacuum() -> Self {
        Self::new([[0.5, 0.0], [0.0, 0.5]])
    }

    pub fn det(&self) -> f64 {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    pub fn inverse(&self) -> Mat2 {
        let d = self.det();
        [[self.cov[1][1] / d, -self.cov[0][1] / d], [-self.cov[1][0] / d, self.cov[0][0] / d]]
    }

    /// Eigenvalues `(v_min, v_max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.cov[0][0];
        let b = self.cov[0][1];
        let d = self.cov[1][1];
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (mean - rad, mean + rad)
    }

    /// Variance of `X cos(phi) + P sin(phi)`.
    pub fn quadrature_variance(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        c * c * self.cov[0][0] + 2.0 * s * c * self.cov[0][1] + s * s * self.cov[1][1]
    }

    pub fn density(&self, x: f64, p: f64) -> f64 {
        let si = self.inverse();
        let q = si[0][0] * x * x + 2.0 * si[0][1] * x * p + si[1][1] * p * p;
        (-0.5 * q).exp() / (2.0 * PI * self.det().sqrt())
    }
}

/// `O_j S_j O_j^T` with `O_j = [[Re th, -Im th], [Im th, Re th]]`, `S_j = diag(e^{2r}, e^{-2r})`.
pub fn mode_matrix(theta: Complex64, r: f64) -> Mat2 {
    let (a, b) = (theta.re, theta.im);
    let (e1, e2) = ((2.0 * r).exp(), (-2.0 * r).exp());
    [[a * a * e1 + b * b * e2, a * b * (e1 - e2)], [a * b * (e1 - e2), b * b * e1 + a * a * e2]]
}

/// Covariance `(theta_vac^2 I + sum_j O_j S_j O_j^T) / 2`.
pub fn covariance_from_thetas(thetas: &[Complex64], theta_vac: f64, r: &[f64]) -> GaussianState {
    let v = theta_vac * theta_vac;
    let mut cov = [[v, 0.0], [0.0, v]];
    for (th, &rj) in thetas.iter().zip(r) {
        let m = mode_matrix(*th, rj);
        for i in 0..2 {
            for k in 0..2 {
                cov[i][k] += m[i][k];
            }
        }
    }
    for row in cov.iter_mut() {
        for x in row.iter_mut() {
            *x *= 0.5;
        }
    }
    GaussianState::new(cov)
}

/// Gaussian TRWF of the squeezed state at one delay of `proj`.
pub fn gaussian_trwf(proj: &DetectionProjection, r: &[f64], idx: usize) -> GaussianState {
    covariance_from_thetas(&proj.thetas_at(idx), proj.theta_vac[idx], r)
}

/// The photon-subtracted mixture `(1/N) sum_j b_j rho b_j^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtractedState {
    /// `sinh^2 r_j / N`.
    pub weights: Vec<f64>,
    /// `N = sum_j sinh^2 r_j`.
    pub n_photons: f64,
}

impl SubtractedState {
    pub fn from_squeezing(r: &[f64]) -> Result<Self> {
        let s: Vec<f64> = r.iter().map(|x| x.sinh().powi(2)).collect();
        let n: f64 = s.iter().sum();
        if !(n > 0.0) {
            return Err(Error::DegenerateSubtraction);
        }
        Ok(Self { weights: s.iter().map(|x| x / n).collect(), n_photons: n })
    }
}

/// Single-mode squeezed vacuum `exp(-(e^{2r} u^2 + e^{-2r} v^2)/4)`.
pub fn squeezed_charfn(r: f64, u: f64, v: f64) -> f64 {
    (-0.25 * ((2.0 * r).exp() * u * u + (-2.0 * r).exp() * v * v)).exp()
}

/// Characteristic function of `b rho_sq b^dag / sinh^2 r`, a squeezed one-photon
/// state: `(1 - q/2) e^{-q/4}` with `q = e^{2r} u^2 + e^{-2r} v^2`.
pub fn single_mode_sub_charfn(r: f64, u: f64, v: f64) -> Result<Complex64> {
    if r == 0.0 {
        return Err(Error::DegenerateSubtraction);
    }
    let q = (2.0 * r).exp() * u * u + (-2.0 * r).exp() * v * v;
    Ok(Complex64::new((1.0 - 0.5 * q) * (-0.25 * q).exp(), 0.0))
}

/// Sampled characteristic function, `u`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFnGrid {
    pub u: Axis,
    pub v: Axis,
    pub values: Vec<Complex64>,
}

impl CharFnGrid {
    pub fn at(&self, iu: usize, iv: usize) -> Complex64 {
        self.values[iu * self.v.n + iv]
    }

    fn edge_max(&self) -> f64 {
        let (nu, nv) = (self.u.n, self.v.n);
        let mut m: f64 = 0.0;
        for iu in 0..nu {
            m = m.max(self.at(iu, 0).norm()).max(self.at(iu, nv - 1).norm());
        }
        for iv in 0..nv {
            m = m.max(self.at(0, iv).norm()).max(self.at(nu - 1, iv).norm());
        }
        m
    }
}

/// Arguments `O_j^T (u, v)` of the per-mode factors.
fn rotated(theta: Complex64, u: f64, v: f64) -> (f64, f64) {
    (theta.re * u + theta.im * v, -theta.im * u + theta.re * v)
}

/// Product form: vacuum factor times one squeezed factor per mode.
pub fn charfn_psq(thetas: &[Complex64], theta_vac: f64, r: &[f64], u: Axis, v: Axis) -> CharFnGrid {
    let mut values = Vec::with_capacity(u.n * v.n);
    for iu in 0..u.n {
        let uu = u.point(iu);
        for iv in 0..v.n {
            let vv = v.point(iv);
            let mut val = (-0.25 * theta_vac * theta_vac * (uu * uu + vv * vv)).exp();
            for (th, &rj) in thetas.iter().zip(r) {
                let (a, b) = rotated(*th, uu, vv);
                val *= squeezed_charfn(rj, a, b);
            }
            values.push(Complex64::new(val, 0.0));
        }
    }
    CharFnGrid { u, v, values }
}

/// Mixture over which mode lost the photon: in term `j` the squeezed factor
/// of mode `j` is replaced by its photon-subtracted counterpart.
pub fn charfn_sub(
    sub: &SubtractedState,
    thetas: &[Complex64],
    theta_vac: f64,
    r: &[f64],
    u: Axis,
    v: Axis,
) -> CharFnGrid {
    let mut values = Vec::with_capacity(u.n * v.n);
    for iu in 0..u.n {
        let uu = u.point(iu);
        for iv in 0..v.n {
            let vv = v.point(iv);
            let vac = (-0.25 * theta_vac * theta_vac * (uu * uu + vv * vv)).exp();
            let factors: Vec<(f64, f64)> = thetas
                .iter()
                .zip(r)
                .map(|(th, &rj)| {
                    let (a, b) = rotated(*th, uu, vv);
                    let q = (2.0 * rj).exp() * a * a + (-2.0 * rj).exp() * b * b;
                    ((-0.25 * q).exp(), (1.0 - 0.5 * q) * (-0.25 * q).exp())
                })
                .collect();
            let mut total = 0.0;
            for (j, wj) in sub.weights.iter().enumerate() {
                let mut term = *wj;
                for (k, f) in factors.iter().enumerate() {
                    term *= if k == j { f.1 } else { f.0 };
                }
                total += term;
            }
            values.push(Complex64::new(vac * total, 0.0));
        }
    }
    CharFnGrid { u, v, values }
}

/// Sampled Wigner function, `x`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: Axis,
    pub p: Axis,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(x: Axis, p: Axis, f: F) -> Self {
        let mut values = Vec::with_capacity(x.n * p.n);
        for ix in 0..x.n {
            let xx = x.point(ix);
            for ip in 0..p.n {
                values.push(f(xx, p.point(ip)));
            }
        }
        Self { x, p, values }
    }

    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p.n + ip]
    }

    pub fn cell(&self) -> f64 {
        self.x.step * self.p.step
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.x == other.x && self.p == other.p
    }

    /// Value at the grid point nearest to the origin.
    pub fn origin_value(&self) -> f64 {
        let ix = nearest(&self.x, 0.0);
        let ip = nearest(&self.p, 0.0);
        self.at(ix, ip)
    }

    pub fn scaled(mut self, k: f64) -> Self {
        for v in self.values.iter_mut() {
            *v *= k;
        }
        self
    }
}

fn nearest(a: &Axis, x: f64) -> usize {
    let i = ((x - a.min) / a.step).round();
    (i.max(0.0) as usize).min(a.n - 1)
}

/// `W(x,p) = (2 pi)^-2 int int W~(u,v) e^{i(ux + vp)} du dv` by a direct
/// separable Fourier sum onto arbitrary `x`, `p` axes.
pub fn wigner_from_charfn(cf: &CharFnGrid, x: Axis, p: Axis) -> Result<WignerGrid> {
    let edge = cf.edge_max();
    if edge > 1e-8 {
        return Err(Error::GridTruncation { edge });
    }
    let (nu, nv) = (cf.u.n, cf.v.n);
    let c = DMatrix::from_fn(nu, nv, |iu, iv| cf.at(iu, iv));
    let ev = DMatrix::from_fn(nv, p.n, |iv, ip| cis(cf.v.point(iv) * p.point(ip)));
    let eu = DMatrix::from_fn(x.n, nu, |ix, iu| cis(cf.u.point(iu) * x.point(ix)));
    let w = eu * (c * ev);
    let scale = cf.u.step * cf.v.step / (4.0 * PI * PI);
    let mut values = Vec::with_capacity(x.n * p.n);
    for ix in 0..x.n {
        for ip in 0..p.n {
            values.push(w[(ix, ip)].re * scale);
        }
    }
    Ok(WignerGrid { x, p, values })
}

/// Closed-form Gaussian density on a grid.
pub fn gaussian_density(state: &GaussianState, x: Axis, p: Axis) -> WignerGrid {
    WignerGrid::from_fn(x, p, |a, b| state.density(a, b))
}

/// Closed-form TRWF of the subtracted state,
/// `N(x; S) [1 + 1/2 sum_j w_j (y^T M_j y - tr(M_j S^-1))]`, `y = S^-1 x`.
pub fn subtracted_value(state: &GaussianState, mats: &[Mat2], weights: &[f64], x: f64, p: f64) -> f64 {
    let si = state.inverse();
    let y0 = si[0][0] * x + si[0][1] * p;
    let y1 = si[1][0] * x + si[1][1] * p;
    let mut corr = 0.0;
    for (m, w) in mats.iter().zip(weights) {
        let quad = m[0][0] * y0 * y0 + 2.0 * m[0][1] * y0 * y1 + m[1][1] * y1 * y1;
        let tr = m[0][0] * si[0][0] + m[0][1] * si[1][0] + m[1][0] * si[0][1] + m[1][1] * si[1][1];
        corr += w * (quad - tr);
    }
    state.density(x, p) * (1.0 + 0.5 * corr)
}

pub fn subtracted_density(state: &GaussianState, mats: &[Mat2], weights: &[f64], x: Axis, p: Axis) -> WignerGrid {
    WignerGrid::from_fn(x, p, |a, b| subtracted_value(state, mats, weights, a, b))
}

/// Laguerre polynomial `L_n(z)`.
pub fn laguerre(n: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - z);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - z) * cur - k as f64 * prev;
        prev = cur;
        cur = next / (k + 1) as f64;
    }
    cur
}

/// Wigner function of the Fock state `|n>`.
pub fn fock_wigner(n: usize, x: f64, p: f64) -> f64 {
    let rho2 = x * x + p * p;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign / PI * laguerre(n, 2.0 * rho2) * (-rho2).exp()
}

/// `P(n) = 2 pi int int W W_n`, clipped to `[0, 1]`.
pub fn photon_probabilities(w: &WignerGrid, n_max: usize) -> Vec<f64> {
    let x = w.x.points();
    let p = w.p.points();
    (0..=n_max)
        .map(|n| {
            let mut acc = 0.0;
            for (ix, &xx) in x.iter().enumerate() {
                for (ip, &pp) in p.iter().enumerate() {
                    acc += w.at(ix, ip) * fock_wigner(n, xx, pp);
                }
            }
            (2.0 * PI * acc * w.cell()).clamp(0.0, 1.0)
        })
        .collect()
}

/// Hilbert-Schmidt distance `2 pi int int (W1 - W2)^2`.
pub fn hs_distance(a: &WignerGrid, b: &WignerGrid) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(2.0 * PI * s * a.cell())
}
