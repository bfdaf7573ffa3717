//! Simulated homodyne measurement and reconstruction of the detected state:
//! quadrature sampling, moment estimation, Gram-Charlier series, filtered
//! back-projection and dominant-mode extraction.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::detection::{gate_normalization, GatingFunction};
use crate::error::{Error, Result};
use crate::kernel::cis;
use crate::phase_space::{Axis, GaussianState, WignerGrid};

/// Negative marginal mass tolerated (and clipped) before sampling fails.
pub const MAX_NEGATIVE_MASS: f64 = 1e-4;

/// Samples of `X_phi(t_d)` drawn from one reproducible RNG stream.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSampleSet {
    pub phase: f64,
    pub t_d: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

/// State to be measured.
#[derive(Debug, Clone, Copy)]
pub enum QuadratureSource<'a> {
    Gaussian(&'a GaussianState),
    Wigner(&'a WignerGrid),
}

/// Stream id for a (phase, delay) cell, so cells can be sampled in any order
/// or in parallel without changing the draws.
pub fn stream_id(phase_index: usize, delay_index: usize) -> u64 {
    // SplitMix64 finaliser over the packed indices.
    let mut z = ((phase_index as u64) << 32 ^ delay_index as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `n` i.i.d. values of `X cos(phi) + P sin(phi)`.
pub fn sample_quadratures(
    source: QuadratureSource<'_>,
    phase: f64,
    t_d: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<QuadratureSampleSet> {
    let mut rng = rng_for(seed, stream);
    let samples = match source {
        QuadratureSource::Gaussian(state) => {
            let sd = state.quadrature_variance(phase).sqrt();
            let normal = Normal::new(0.0, sd)
                .map_err(|_| Error::InvalidParameter { name: "covariance", reason: "non-finite variance" })?;
            (0..n).map(|_| normal.sample(&mut rng)).collect()
        }
        QuadratureSource::Wigner(w) => {
            let set = marginals_from_wigner(w, &[phase]);
            let cdf = MarginalCdf::new(&set.q, &set.pr[0])?;
            (0..n).map(|_| cdf.invert(rng.random::<f64>())).collect()
        }
    };
    Ok(QuadratureSampleSet { phase, t_d, samples, seed, stream })
}

/// Piecewise-linear CDF of a tabulated density.
struct MarginalCdf {
    q: Vec<f64>,
    cdf: Vec<f64>,
}

impl MarginalCdf {
    fn new(q: &Axis, pr: &[f64]) -> Result<Self> {
        let negative: f64 = pr.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>() * q.step;
        if negative > MAX_NEGATIVE_MASS {
            return Err(Error::NegativeMarginal { mass: negative });
        }
        let clipped: Vec<f64> = pr.iter().map(|v| v.max(0.0)).collect();
        let mut cdf = Vec::with_capacity(clipped.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 1..clipped.len() {
            acc += 0.5 * (clipped[k - 1] + clipped[k]) * q.step;
            cdf.push(acc);
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(Self { q: q.points(), cdf })
    }

    fn invert(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let f = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.q[k - 1] + f * (self.q[k] - self.q[k - 1])
    }
}

/// `G_N`, mapping symmetrised moments `<X^{N-k} P^k>_S` to `<X_phi^N>` at each phase.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub order: usize,
    pub phases: Vec<f64>,
    pub g: DMatrix<f64>,
    /// Left inverse (the true inverse when there are `order + 1` phases).
    pub inverse: DMatrix<f64>,
    pub condition: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Builds `G_N` for the given phases. More than `N + 1` phases give a
/// least-squares left inverse.
pub fn moment_matrix(order: usize, phases: &[f64]) -> Result<MomentMatrix> {
    if phases.len() < order + 1 {
        return Err(Error::InsufficientPhases { order, needed: order + 1, got: phases.len() });
    }
    for i in 0..phases.len() {
        for j in i + 1..phases.len() {
            if (phases[i] - phases[j]).sin().abs() < 1e-12 {
                return Err(Error::DuplicatePhases { first: i, second: j });
            }
        }
    }
    let g = DMatrix::from_fn(phases.len(), order + 1, |i, k| {
        let (s, c) = phases[i].sin_cos();
        binomial(order, k) * c.powi((order - k) as i32) * s.powi(k as i32)
    });
    let svd = g.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let inverse = svd
        .pseudo_inverse(1e-14 * smax)
        .map_err(|_| Error::InvalidParameter { name: "phases", reason: "moment matrix is singular" })?;
    Ok(MomentMatrix { order, phases: phases.to_vec(), g, inverse, condition: smax / smin })
}

/// Equally spaced phases `k pi / n`.
pub fn default_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * PI / n as f64).collect()
}

/// Symmetrised moments `<X^n P^m>_S` for `n + m <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub order: usize,
    /// `values[k][m] = <X^{k-m} P^m>_S`.
    pub values: Vec<Vec<f64>>,
}

impl MomentSet {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.values[n + m][m]
    }

    /// Moments of a tabulated Wigner function by direct quadrature.
    pub fn from_wigner(w: &WignerGrid, order: usize) -> Self {
        let x = w.x.points();
        let p = w.p.points();
        let mut values: Vec<Vec<f64>> = (0..=order).map(|k| vec![0.0; k + 1]).collect();
        let mut xp = vec![0.0; order + 1];
        let mut pp = vec![0.0; order + 1];
        for (ix, &xx) in x.iter().enumerate() {
            powers(xx, &mut xp);
            for (ip, &p0) in p.iter().enumerate() {
                powers(p0, &mut pp);
                let wv = w.at(ix, ip);
                for (k, row) in values.iter_mut().enumerate() {
                    for (m, v) in row.iter_mut().enumerate() {
                        *v += wv * xp[k - m] * pp[m];
                    }
                }
            }
        }
        for row in values.iter_mut() {
            for v in row.iter_mut() {
                *v *= w.cell();
            }
        }
        Self { order, values }
    }

    /// Exact moments of a zero-mean Gaussian, from the coefficients of its
    /// moment generating function `exp((a^2 Sxx + 2ab Sxp + b^2 Spp)/2)`.
    pub fn from_gaussian(state: &GaussianState, order: usize) -> Self {
        let (sxx, sxp, spp) = (state.cov[0][0], state.cov[0][1], state.cov[1][1]);
        let fact = |n: usize| (1..=n).fold(1.0, |a, k| a * k as f64);
        let values = (0..=order)
            .map(|k| {
                (0..=k)
                    .map(|m| {
                        let n = k - m;
                        let mut acc = 0.0;
                        for j in 0..=n.min(m) {
                            if (n - j) % 2 != 0 || (m - j) % 2 != 0 {
                                continue;
                            }
                            let (i, l) = ((n - j) / 2, (m - j) / 2);
                            acc += (0.5 * sxx).powi(i as i32) / fact(i) * sxp.powi(j as i32) / fact(j)
                                * (0.5 * spp).powi(l as i32)
                                / fact(l);
                        }
                        acc * fact(n) * fact(m)
                    })
                    .collect()
            })
            .collect();
        Self { order, values }
    }
}

fn powers(x: f64, out: &mut [f64]) {
    let mut v = 1.0;
    for o in out.iter_mut() {
        *o = v;
        v *= x;
    }
}

/// Symmetrised moments from generalised-quadrature moments.
///
/// `raw[i][k]` is `<X_{phi_i}^k>` for `k = 0..=order`; every order `k` is
/// inverted by least squares over all the phases.
pub fn moments_from_raw(phases: &[f64], raw: &[Vec<f64>], order: usize) -> Result<MomentSet> {
    if phases.len() < order + 1 {
        return Err(Error::InsufficientPhases { order, needed: order + 1, got: phases.len() });
    }
    let mut values = vec![vec![1.0]];
    for k in 1..=order {
        let g = moment_matrix(k, phases)?;
        let b = DMatrix::from_fn(phases.len(), 1, |i, _| raw[i][k]);
        let s = &g.inverse * b;
        values.push(s.iter().cloned().collect());
    }
    Ok(MomentSet { order, values })
}

/// Sample moments of each set, then [`moments_from_raw`].
pub fn estimate_moments(sets: &[QuadratureSampleSet], order: usize) -> Result<MomentSet> {
    let phases: Vec<f64> = sets.iter().map(|s| s.phase).collect();
    let raw: Vec<Vec<f64>> = sets
        .iter()
        .map(|s| {
            let mut acc = vec![0.0; order + 1];
            let mut pw = vec![0.0; order + 1];
            for &x in &s.samples {
                powers(x, &mut pw);
                for (a, p) in acc.iter_mut().zip(&pw) {
                    *a += p;
                }
            }
            acc.iter().map(|a| a / s.samples.len() as f64).collect()
        })
        .collect();
    moments_from_raw(&phases, &raw, order)
}

/// Coefficients of the physicists' Hermite polynomials, `h[n][a]` for `x^a`.
pub fn hermite_coefficients(order: usize) -> Vec<Vec<f64>> {
    let mut h: Vec<Vec<f64>> = vec![vec![1.0]];
    if order >= 1 {
        h.push(vec![0.0, 2.0]);
    }
    for n in 1..order {
        let mut next = vec![0.0; n + 2];
        for (a, c) in h[n].iter().enumerate() {
            next[a + 1] += 2.0 * c;
        }
        for (a, c) in h[n - 1].iter().enumerate() {
            next[a] -= 2.0 * n as f64 * c;
        }
        h.push(next);
    }
    h
}

/// Gram-Charlier coefficients `C_nm = E[H_n(X) H_m(P)] / (2^{n+m} n! m!)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcCoefficients {
    pub order: usize,
    /// `c[n][m]`, zero where `n + m > order`.
    pub c: Vec<Vec<f64>>,
}

pub fn gc_coefficients(moments: &MomentSet) -> GcCoefficients {
    let order = moments.order;
    let h = hermite_coefficients(order);
    let fact = |n: usize| (1..=n).fold(1.0, |a, k| a * k as f64);
    let mut c = vec![vec![0.0; order + 1]; order + 1];
    for n in 0..=order {
        for m in 0..=order - n {
            let mut e = 0.0;
            for (a, ha) in h[n].iter().enumerate() {
                for (b, hb) in h[m].iter().enumerate() {
                    if *ha != 0.0 && *hb != 0.0 {
                        e += ha * hb * moments.get(a, b);
                    }
                }
            }
            c[n][m] = e / (2f64.powi((n + m) as i32) * fact(n) * fact(m));
        }
    }
    GcCoefficients { order, c }
}

fn hermite_values(x: f64, order: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if order >= 1 {
        out[1] = 2.0 * x;
    }
    for n in 1..order {
        out[n + 1] = 2.0 * x * out[n] - 2.0 * n as f64 * out[n - 1];
    }
}

/// Truncated series `sum C_nm H_n(x) H_m(p) W_vac(x, p)` over `n + m <= order`.
pub fn gram_charlier(moments: &MomentSet, x: Axis, p: Axis) -> WignerGrid {
    let gc = gc_coefficients(moments);
    let order = gc.order;
    let hp: Vec<Vec<f64>> = (0..p.n)
        .map(|ip| {
            let mut v = vec![0.0; order + 1];
            hermite_values(p.point(ip), order, &mut v);
            v
        })
        .collect();
    let mut hx = vec![0.0; order + 1];
    let mut values = Vec::with_capacity(x.n * p.n);
    for ix in 0..x.n {
        let xx = x.point(ix);
        hermite_values(xx, order, &mut hx);
        // Fold the x part first: a_m = sum_n C_nm H_n(x).
        let a: Vec<f64> = (0..=order).map(|m| (0..=order - m).map(|n| gc.c[n][m] * hx[n]).sum()).collect();
        for (ip, h) in hp.iter().enumerate() {
            let pp = p.point(ip);
            let s: f64 = a.iter().zip(h).map(|(a, h)| a * h).sum();
            values.push(s * (-xx * xx - pp * pp).exp() / PI);
        }
    }
    WignerGrid { x, p, values }
}

/// Marginal densities `pr_phi(q)` of `X_phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSet {
    pub phases: Vec<f64>,
    pub q: Axis,
    /// One row per phase.
    pub pr: Vec<Vec<f64>>,
}

/// Spatial frequency beyond which a state of quadrature variance `var` has a
/// negligible characteristic function, capped at the grid Nyquist limit.
fn slice_cutoff(var: f64, step: f64) -> f64 {
    (80.0 / var.max(1e-6)).sqrt().min(PI / step)
}

/// Radon projections of `w` along each phase, through the Fourier slice
/// `pr^_phi(xi) = int int W e^{-i xi (x cos phi + p sin phi)}` and its 1-D inverse.
/// The marginals share the `x` axis of `w`.
pub fn marginals_from_wigner(w: &WignerGrid, phases: &[f64]) -> MarginalSet {
    let q = w.x;
    let xs = w.x.points();
    let ps = w.p.points();
    let wm = DMatrix::from_fn(w.x.n, w.p.n, |i, j| w.at(i, j));
    let half = q.half_width().max(w.p.half_width());
    let dxi = PI / (1.25 * SQRT_2 * half);
    let pr = phases
        .iter()
        .map(|&phi| {
            let (s, c) = phi.sin_cos();
            let var: f64 = {
                let mut acc = 0.0;
                for (i, x) in xs.iter().enumerate() {
                    for (j, p) in ps.iter().enumerate() {
                        let u = x * c + p * s;
                        acc += wm[(i, j)] * u * u;
                    }
                }
                acc * w.cell()
            };
            let xi_max = slice_cutoff(var, w.x.step.max(w.p.step));
            let nxi = (xi_max / dxi).ceil() as usize + 1;
            let xi: Vec<f64> = (0..nxi).map(|k| k as f64 * dxi).collect();
            let ep = DMatrix::from_fn(w.p.n, nxi, |j, k| cis(-xi[k] * s * ps[j]));
            let wc = wm.map(|v| Complex64::new(v, 0.0));
            let inner = wc * ep;
            let slice: Vec<Complex64> = (0..nxi)
                .map(|k| (0..w.x.n).map(|i| cis(-xi[k] * c * xs[i]) * inner[(i, k)]).sum::<Complex64>() * w.cell())
                .collect();
            // pr(q) = (1/pi) Re int_0^inf pr^(xi) e^{i xi q} d xi
            (0..q.n)
                .map(|iq| {
                    let qq = q.point(iq);
                    let mut acc = 0.0;
                    for k in 0..nxi {
                        let wt = if k == 0 || k == nxi - 1 { 0.5 } else { 1.0 };
                        acc += wt * (slice[k] * cis(xi[k] * qq)).re;
                    }
                    acc * dxi / PI
                })
                .collect()
        })
        .collect();
    MarginalSet { phases: phases.to_vec(), q, pr }
}

/// Minimum phase count accepted by [`inverse_radon`].
pub const MIN_RADON_PHASES: usize = 16;

/// Filtered back-projection with a ramp filter cut at 0.8 of the marginal
/// Nyquist frequency; the result is renormalised to unit integral.
pub fn inverse_radon(m: &MarginalSet, x: Axis, p: Axis) -> Result<WignerGrid> {
    if m.phases.len() < MIN_RADON_PHASES {
        return Err(Error::TooFewPhases { needed: MIN_RADON_PHASES, got: m.phases.len() });
    }
    let cutoff = 0.8 * PI / m.q.step;
    let reach = (x.half_width().powi(2) + p.half_width().powi(2)).sqrt();
    let qs = m.q.points();

    // Filtered projections on an oversampled s axis, by direct convolution
    // with the band-limited ramp kernel (no periodic images in s).
    let ds = m.q.step / 4.0;
    let ns = (2.0 * reach / ds).ceil() as usize + 1;
    let s_axis = Axis { min: -reach, step: 2.0 * reach / (ns - 1) as f64, n: ns };
    let weights = phase_weights(&m.phases);
    let filtered: Vec<Vec<f64>> = m
        .pr
        .iter()
        .map(|row| {
            (0..ns)
                .map(|is| {
                    let s = s_axis.point(is);
                    qs.iter().zip(row).map(|(q, v)| v * ramp_kernel(s - q, cutoff)).sum::<f64>() * m.q.step
                })
                .collect()
        })
        .collect();

    let mut values = vec![0.0; x.n * p.n];
    for ((&phi, wt), f) in m.phases.iter().zip(&weights).zip(&filtered) {
        let (s, c) = phi.sin_cos();
        for ix in 0..x.n {
            let xc = x.point(ix) * c;
            for ip in 0..p.n {
                values[ix * p.n + ip] += wt * cubic_at(&s_axis, f, xc + p.point(ip) * s);
            }
        }
    }
    let mut out = WignerGrid { x, p, values };
    for v in out.values.iter_mut() {
        *v /= 2.0 * PI;
    }
    let total = out.integral();
    Ok(out.scaled(1.0 / total))
}

/// `(1/pi) int_0^c xi cos(xi s) d xi`, the ramp filter cut at `c`.
fn ramp_kernel(s: f64, c: f64) -> f64 {
    let x = c * s;
    if x.abs() < 1e-4 {
        // Taylor series of (x sin x + cos x - 1) / x^2.
        return c * c / PI * (0.5 - x * x / 8.0);
    }
    (x * x.sin() + x.cos() - 1.0) / (PI * s * s)
}

/// Angular quadrature weights for phases on the half circle, periodic in pi.
fn phase_weights(phases: &[f64]) -> Vec<f64> {
    let k = phases.len();
    let mut idx: Vec<usize> = (0..k).collect();
    let red: Vec<f64> = phases.iter().map(|p| p - PI * (p / PI).floor()).collect();
    idx.sort_by(|&a, &b| red[a].partial_cmp(&red[b]).unwrap_or(Ordering::Equal));
    let mut w = vec![0.0; k];
    for (pos, &i) in idx.iter().enumerate() {
        let prev = if pos == 0 { red[idx[k - 1]] - PI } else { red[idx[pos - 1]] };
        let next = if pos == k - 1 { red[idx[0]] + PI } else { red[idx[pos + 1]] };
        w[i] = 0.5 * (next - prev);
    }
    w
}

/// Catmull-Rom interpolation, zero outside the axis.
fn cubic_at(a: &Axis, f: &[f64], s: f64) -> f64 {
    let t = (s - a.min) / a.step;
    if t < 0.0 || t > (a.n - 1) as f64 {
        return 0.0;
    }
    let i = (t.floor() as usize).min(a.n - 2);
    let u = t - i as f64;
    let g = |j: isize| -> f64 {
        let j = j.clamp(0, a.n as isize - 1) as usize;
        f[j]
    };
    let (p0, p1, p2, p3) = (g(i as isize - 1), g(i as isize), g(i as isize + 1), g(i as isize + 2));
    p1 + 0.5 * u * (p2 - p0 + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + u * (3.0 * (p1 - p2) + p3 - p0)))
}

/// A single mode recovered from a series of Gaussian TRWFs.
#[derive(Debug, Clone)]
pub struct ExtractedMode {
    pub delays: Vec<f64>,
    pub theta: Vec<Complex64>,
    /// Median squeezing over delays with `|theta|^2 > 0.1 max`.
    pub r: f64,
    /// Field mode on the delay grid.
    pub alpha: Vec<Complex64>,
}

/// Relative Tikhonov weight of the deconvolution.
pub const DECONVOLUTION_EPSILON: f64 = 1e-3;

/// Recovers `theta(t_d)`, `r` and the field mode `alpha(t)` of a single
/// dominant mode from the covariance at each delay.
///
/// With one mode, `V_max = (1 + T(e^{2r} - 1))/2` and `V_min = (1 - T(1 - e^{-2r}))/2`,
/// so `e^{2r} = (2 V_max - 1)/(1 - 2 V_min)` and
/// `T = (2 V_max - 1)(1 - 2 V_min) / (2 (V_max + V_min - 1))`.
/// The phase of `theta` is the direction of the `V_max` axis.
pub fn extract_mode(
    series: &[(f64, GaussianState)],
    gate: &GatingFunction,
    c: f64,
    tol: f64,
) -> Result<ExtractedMode> {
    let delays: Vec<f64> = series.iter().map(|(t, _)| *t).collect();
    let mut theta = Vec::with_capacity(series.len());
    let mut rs = Vec::with_capacity(series.len());
    let mut any = false;
    let mut prev: Option<Complex64> = None;
    for (_, st) in series {
        let (vmin, vmax) = st.eigenvalues();
        if vmax <= 0.5 + tol || vmin >= 0.5 {
            theta.push(Complex64::new(0.0, 0.0));
            rs.push(0.0);
            continue;
        }
        any = true;
        let (a, d, b) = (2.0 * vmax - 1.0, 1.0 - 2.0 * vmin, vmax + vmin - 1.0);
        rs.push(0.5 * (a / d).ln());
        let t = (a * d / (2.0 * b)).max(0.0);
        let angle = major_axis_angle(st, vmax);
        let mut th = cis(angle) * t.sqrt();
        if let Some(pv) = prev {
            if (pv.conj() * th).re < 0.0 {
                th = -th;
            }
        }
        prev = Some(th);
        theta.push(th);
    }
    if !any {
        return Err(Error::NoSqueezingDetected);
    }
    let tmax = theta.iter().map(|t| t.norm_sqr()).fold(0.0, f64::max);
    let mut sel: Vec<f64> = theta
        .iter()
        .zip(&rs)
        .filter(|(t, _)| t.norm_sqr() > 0.1 * tmax)
        .map(|(_, r)| *r)
        .collect();
    sel.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let r = median(&sel);
    let alpha = deconvolve(&delays, &theta, gate, c, DECONVOLUTION_EPSILON);
    Ok(ExtractedMode { delays, theta, r, alpha })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Direction of the eigenvector of `V_max`, in `(-pi/2, pi/2]`.
fn major_axis_angle(st: &GaussianState, vmax: f64) -> f64 {
    let (a, b, d) = (st.cov[0][0], st.cov[0][1], st.cov[1][1]);
    let (vx, vy) = if b.abs() > 1e-300 {
        (b, vmax - a)
    } else if a >= d {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let mut ang = vy.atan2(vx);
    if ang <= -PI / 2.0 {
        ang += PI;
    } else if ang > PI / 2.0 {
        ang -= PI;
    }
    ang
}

/// Inverts `theta = -i sqrt(2) N (R * alpha)` on the delay grid.
///
/// Both sides are taken to the frequency domain with a direct transform on a
/// zero-padded grid; division by the gate spectrum uses a Tikhonov penalty
/// `eps max R~^2`.
pub fn deconvolve(delays: &[f64], theta: &[Complex64], gate: &GatingFunction, c: f64, eps: f64) -> Vec<Complex64> {
    let n = delays.len();
    let dt = (delays[n - 1] - delays[0]) / (n - 1) as f64;
    let span = 4.0 * dt * n as f64;
    let dw = 2.0 * PI / span;
    let k_max = (PI / dt / dw).ceil() as i64;
    let pref = Complex64::new(0.0, -SQRT_2 * gate_normalization(gate, c));
    let spectrum: Vec<(f64, Complex64)> = (-k_max..=k_max)
        .map(|k| {
            let w = k as f64 * dw;
            let th: Complex64 = delays.iter().zip(theta).map(|(t, v)| cis(w * t) * *v).sum::<Complex64>() * dt;
            let g = gate.spectrum(w);
            (w, th * g / (g * g + eps) / pref)
        })
        .collect();
    delays
        .iter()
        .map(|&t| spectrum.iter().map(|(w, a)| cis(-w * t) * *a).sum::<Complex64>() * dw / (2.0 * PI))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_recurrence() {
        let h = hermite_coefficients(4);
        assert_eq!(h[2], vec![-2.0, 0.0, 4.0]);
        assert_eq!(h[4], vec![12.0, 0.0, -48.0, 0.0, 16.0]);
    }

    #[test]
    fn stream_ids_differ() {
        assert_ne!(stream_id(0, 1), stream_id(1, 0));
        assert_ne!(stream_id(0, 0), stream_id(0, 1));
    }

    #[test]
    fn phase_weights_cover_half_circle() {
        let w = phase_weights(&default_phases(7));
        assert!((w.iter().sum::<f64>() - PI).abs() < 1e-12);
    }
}
