//! Discretised Bogoliubov kernel of the conformal-time squeezer and its
//! Bloch-Messiah reduction into independent squeezed principal modes.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{DrivingPulse, FrequencyGrid, TimeGrid};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest tolerated `|tau^-1(t) - t|` at the ends of the time window.
pub const MAX_EDGE_DEVIATION_FS: f64 = 1e-4;

/// `e^{i x}`.
#[inline]
pub(crate) fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

/// `e^{i x} - 1` without cancellation for small `x`.
#[inline]
pub(crate) fn cis_m1(x: f64) -> Complex64 {
    let h = 0.5 * x;
    I * (2.0 * h.sin()) * cis(h)
}

/// Discrete kernel pair with the quadrature weights folded in symmetrically:
/// `P_ik = sqrt(w_i w_k) p(w_i, w_k)`, `Q_ik = sqrt(w_i w_k) q(w_i, w_k)`.
#[derive(Debug, Clone)]
pub struct BogoliubovKernel {
    pub grid: FrequencyGrid,
    pub p: CMatrix,
    pub q: CMatrix,
    pub r_eff: f64,
}

/// Time grid fine enough for the kernel integrals: `omega_max * dt <= pi/8`,
/// i.e. eight points per period of the fastest `omega + omega'` oscillation.
pub fn kernel_time_grid(fgrid: &FrequencyGrid, half_width_fs: f64) -> Result<TimeGrid> {
    let n = (2.0 * half_width_fs * fgrid.omega_max * 2.0 / (PI / 4.0)).ceil() as usize + 1;
    TimeGrid::new(-half_width_fs, half_width_fs, n)
}

/// Builds `P` and `Q` from the deviation form of the time integral.
///
/// `e^{i w tau^-1(t)} = e^{i w t} + e^{i w t}(e^{i w (tau^-1(t) - t)} - 1)`; the
/// first term is the identity, the second is compactly supported.
pub fn compute_kernel(
    pulse: &DrivingPulse,
    fgrid: &FrequencyGrid,
    tgrid: &TimeGrid,
) -> Result<BogoliubovKernel> {
    if !(fgrid.omega_min > 0.0) {
        return Err(Error::SingularFrequency { omega_min: fgrid.omega_min });
    }
    let edge = pulse
        .inverse_deviation(tgrid.t_max_fs)
        .abs()
        .max(pulse.inverse_deviation(tgrid.t_min_fs).abs());
    if edge > MAX_EDGE_DEVIATION_FS {
        return Err(Error::GridTooNarrow { deviation_fs: edge });
    }

    let w = fgrid.points();
    let n = w.len();
    let t = tgrid.points();
    let tw = tgrid.trapezoid_weights();
    let nt = t.len();

    let dev: Vec<f64> = t.iter().map(|&tl| pulse.inverse_deviation(tl)).collect();
    let f = CMatrix::from_fn(n, nt, |i, l| cis(w[i] * t[l]) * cis_m1(w[i] * dev[l]) * tw[l]);
    let e_minus = CMatrix::from_fn(nt, n, |l, k| cis(-w[k] * t[l]));
    let dm = &f * &e_minus;
    let e_plus = e_minus.conjugate();
    let qm = &f * &e_plus;

    let sw: Vec<f64> = fgrid.weights.iter().map(|x| x.sqrt()).collect();
    let sqrt_w: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let scale = |i: usize, k: usize| sw[i] * sw[k] * sqrt_w[k] / sqrt_w[i] / (2.0 * PI);

    let p = CMatrix::from_fn(n, n, |i, k| {
        let id = if i == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        id + dm[(i, k)] * scale(i, k)
    });
    let q = CMatrix::from_fn(n, n, |i, k| -qm[(i, k)] * scale(i, k));
    Ok(BogoliubovKernel { grid: fgrid.clone(), p, q, r_eff: pulse.r_eff })
}

/// Headroom between the stretched band and the top of the grid. At 2 the
/// edge rows of a strongly driven kernel still leak about 1e-3 of their norm.
pub const RELIABLE_MARGIN: f64 = 3.0;

impl BogoliubovKernel {
    /// Number of leading output rows that cannot lose weight through the top
    /// of the grid: the map stretches frequencies by up to `sqrt(1 + r_eff^2)`,
    /// and the spectral tails need a further factor of `RELIABLE_MARGIN`.
    pub fn reliable_rows(&self) -> usize {
        let limit = self.grid.omega_max / (RELIABLE_MARGIN * (1.0 + self.r_eff * self.r_eff).sqrt());
        self.grid.points().iter().take_while(|&&w| w <= limit).count().max(1)
    }

    /// `|| P P^dag - Q Q^dag - I ||_2` over the reliable output band.
    pub fn symplectic_defect(&self) -> f64 {
        self.symplectic_defect_rows(self.reliable_rows())
    }

    /// Same defect over the leading `rows` output frequencies.
    pub fn symplectic_defect_rows(&self, rows: usize) -> f64 {
        let pb = self.p.rows(0, rows);
        let qb = self.q.rows(0, rows);
        let m = &pb * pb.adjoint() - &qb * qb.adjoint() - CMatrix::identity(rows, rows);
        spectral_norm(m)
    }

    /// `|| P Q^T - Q P^T ||_2` over the reliable output band.
    pub fn cross_defect(&self) -> f64 {
        let rows = self.reliable_rows();
        let pb = self.p.rows(0, rows);
        let qb = self.q.rows(0, rows);
        let m = &pb * qb.transpose() - &qb * pb.transpose();
        spectral_norm(m)
    }
}

fn spectral_norm(m: CMatrix) -> f64 {
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Output of the Bloch-Messiah reduction.
#[derive(Debug, Clone)]
pub struct PrincipalModeSet {
    /// Retained squeezing parameters, descending.
    pub r: Vec<f64>,
    /// Output spectral modes `psi_j(omega_i)` as rows (continuum normalised).
    pub psi: CMatrix,
    /// Input spectral modes `phi_j(omega_i)` as rows.
    pub phi: CMatrix,
    /// Temporal field modes `alpha_j(t)` once computed.
    pub alpha: Option<(TimeGrid, CMatrix)>,
    pub truncation_threshold: f64,
    /// Every squeezing parameter of the kernel, descending, before truncation.
    pub spectrum: Vec<f64>,
    /// `|u^dag P v*| / cosh r_j` per retained mode; 1 for an exact kernel.
    pub alignment: Vec<f64>,
    pub grid: FrequencyGrid,
}

/// Default smallest accepted `|u^dag P v*| / cosh r` for a retained mode.
pub const MIN_ALIGNMENT: f64 = 0.95;

/// Bloch-Messiah reduction via the SVD of `Q`.
///
/// `Q = U diag(sinh r) V^dag`; each pair `(u_j, v_j)` is rotated by a common
/// phase so that `u_j^dag P v_j^*` is real and positive, then the sign is fixed
/// by making the largest component of `psi_j` point along the positive real axis.
pub fn bloch_messiah(kernel: &BogoliubovKernel, threshold: f64) -> Result<PrincipalModeSet> {
    bloch_messiah_with(kernel, threshold, MIN_ALIGNMENT)
}

/// [`bloch_messiah`] with an explicit alignment floor. Lowering it accepts
/// modes that extend past the top of the frequency grid, whose phase is then
/// only approximately fixed; check the detected covariance against
/// [`crate::detection::multimode_marginal_oracle`] when doing so.
pub fn bloch_messiah_with(kernel: &BogoliubovKernel, threshold: f64, min_alignment: f64) -> Result<PrincipalModeSet> {
    let n = kernel.grid.n;
    let w = kernel.grid.points();
    let sw: Vec<f64> = kernel.grid.weights.iter().map(|x| x.sqrt()).collect();

    let svd = kernel.q.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;

    let centroid = |j: usize| -> f64 { (0..n).map(|i| w[i] * u[(i, j)].norm_sqr()).sum() };
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    // Runs of numerically equal singular values are ordered by centroid.
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && s[order[start]] - s[order[end]] <= 1e-12 * smax {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| centroid(a).total_cmp(&centroid(b)));
        start = end;
    }

    let spectrum: Vec<f64> = order.iter().map(|&j| s[j].asinh()).collect();
    let kept: Vec<usize> = order.iter().cloned().filter(|&j| s[j] >= threshold).collect();
    let m = kept.len();

    let mut psi = CMatrix::zeros(m, n);
    let mut phi = CMatrix::zeros(m, n);
    let mut r = Vec::with_capacity(m);
    let mut alignment = Vec::with_capacity(m);

    for (row, &j) in kept.iter().enumerate() {
        let rj = s[j].asinh();
        let mut uj: DVector<Complex64> = u.column(j).into_owned();
        let mut vj: DVector<Complex64> = v_t.row(j).adjoint();
        let pv = &kernel.p * vj.conjugate();
        let c = uj.dotc(&pv);
        let ratio = c.norm() / rj.cosh();
        if !(ratio > min_alignment) {
            return Err(Error::DecompositionFailed { mode: row, ratio });
        }
        let rot = cis(0.5 * c.arg());
        uj *= rot;
        vj *= rot;

        let big = (0..n)
            .max_by(|&a, &b| uj[a].norm_sqr().partial_cmp(&uj[b].norm_sqr()).unwrap_or(Ordering::Equal))
            .unwrap_or(0);
        // psi = conj(u) / sqrt(w), so Re psi has the sign of Re u.
        if uj[big].re < 0.0 {
            uj = -uj;
            vj = -vj;
        }
        for i in 0..n {
            psi[(row, i)] = uj[i].conj() / sw[i];
            phi[(row, i)] = vj[i] / sw[i];
        }
        r.push(rj);
        alignment.push(ratio);
    }

    Ok(PrincipalModeSet {
        r,
        psi,
        phi,
        alpha: None,
        truncation_threshold: threshold,
        spectrum,
        alignment,
        grid: kernel.grid.clone(),
    })
}

impl PrincipalModeSet {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Discrete output vector `u_j(i) = sqrt(w_i) conj(psi_j(omega_i))`.
    pub fn output_vector(&self, j: usize) -> DVector<Complex64> {
        DVector::from_fn(self.grid.n, |i, _| self.psi[(j, i)].conj() * self.grid.weights[i].sqrt())
    }

    /// Discrete input vector `v_j(i) = sqrt(w_i) phi_j(omega_i)`.
    pub fn input_vector(&self, j: usize) -> DVector<Complex64> {
        DVector::from_fn(self.grid.n, |i, _| self.phi[(j, i)] * self.grid.weights[i].sqrt())
    }

    /// Weighted Gram matrices of `psi` and `phi`.
    pub fn gram(&self) -> (CMatrix, CMatrix) {
        let m = self.len();
        let g = |a: &CMatrix| {
            CMatrix::from_fn(m, m, |j, k| {
                (0..self.grid.n).map(|i| a[(j, i)].conj() * a[(k, i)] * self.grid.weights[i]).sum()
            })
        };
        (g(&self.psi), g(&self.phi))
    }

    /// Largest per-mode residual of `P v_j^* = cosh r_j u_j` and `Q v_j = sinh r_j u_j`.
    pub fn reconstruction_residual(&self, kernel: &BogoliubovKernel) -> f64 {
        (0..self.len())
            .map(|j| {
                let u = self.output_vector(j);
                let v = self.input_vector(j);
                let a = (&kernel.p * v.conjugate() - &u * Complex64::from(self.r[j].cosh())).norm();
                let b = (&kernel.q * &v - &u * Complex64::from(self.r[j].sinh())).norm();
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    /// `1 - sum_retained sinh^2 r / sum_all sinh^2 r`.
    pub fn truncation_loss(&self) -> f64 {
        let all: f64 = self.spectrum.iter().map(|r| r.sinh().powi(2)).sum();
        if all == 0.0 {
            return 0.0;
        }
        let kept: f64 = self.r.iter().map(|r| r.sinh().powi(2)).sum();
        1.0 - kept / all
    }

    /// Computes and stores the temporal field modes on `tgrid`.
    pub fn with_field_modes(mut self, tgrid: &TimeGrid, c: f64) -> Self {
        let a = field_modes(&self, tgrid, c);
        self.alpha = Some((*tgrid, a));
        self
    }
}

/// Temporal field modes `alpha_j(t) = -i sqrt(C) int dw sqrt(w) psi_j^*(w) e^{-i w t}`.
pub fn field_modes(modes: &PrincipalModeSet, tgrid: &TimeGrid, c: f64) -> CMatrix {
    let w = modes.grid.points();
    let coef: Vec<f64> = w.iter().zip(&modes.grid.weights).map(|(wi, wt)| wt * wi.sqrt()).collect();
    let t = tgrid.points();
    let phase = CMatrix::from_fn(w.len(), t.len(), |i, l| cis(-w[i] * t[l]) * coef[i]);
    let psi_conj = modes.psi.conjugate();
    (psi_conj * phase) * (-I * c.sqrt())
}

/// Closed-form output mode shape `c E(tau(t)) exp(i(sign pi/2 - f(-t)))`.
pub fn analytic_mode_shape<F: Fn(f64) -> f64>(
    pulse: &DrivingPulse,
    c: Complex64,
    sign: f64,
    phase_fn: F,
    times: &[f64],
) -> Vec<Complex64> {
    times
        .iter()
        .map(|&t| c * pulse.field(pulse.conformal_time(t)) * cis(sign * 0.5 * PI - phase_fn(-t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cis_m1_is_accurate_for_tiny_arguments() {
        let x = 1e-12;
        let z = cis_m1(x);
        assert!((z.im - x).abs() < 1e-24);
        assert!((z.re + 0.5 * x * x).abs() < 1e-30);
    }

    #[test]
    fn identity_channel_has_no_squeezing() {
        let pulse = DrivingPulse::new(16.0, 0.0).unwrap();
        let fg = FrequencyGrid::from_thz(0.1, 200.0, 60).unwrap();
        let tg = kernel_time_grid(&fg, 100.0).unwrap();
        let k = compute_kernel(&pulse, &fg, &tg).unwrap();
        let bm = bloch_messiah(&k, 1e-3).unwrap();
        assert!(bm.is_empty());
        assert_eq!(bm.truncation_loss(), 0.0);
    }
}
