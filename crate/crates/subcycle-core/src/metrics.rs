//! Scalar diagnostics over delay series of the detected state.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::phase_space::GaussianState;

/// Vacuum quadrature variance.
pub const V_VAC: f64 = 0.5;

/// Principal axes of the covariance ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParams {
    pub v_max: f64,
    pub v_min: f64,
    /// Direction of the `v_max` axis in `(-pi/2, pi/2]`; 0 for an isotropic state.
    pub angle: f64,
    pub t_d: f64,
}

pub fn squeeze_ellipse(state: &GaussianState, t_d: f64) -> EllipseParams {
    let (v_min, v_max) = state.eigenvalues();
    let (a, b, d) = (state.cov[0][0], state.cov[0][1], state.cov[1][1]);
    let angle = if (v_max - v_min) <= 1e-15 * v_max {
        0.0
    } else {
        // tan(2 angle) = 2b / (a - d)
        let mut ang = 0.5 * (2.0 * b).atan2(a - d);
        if ang <= -PI / 2.0 {
            ang += PI;
        }
        ang
    };
    EllipseParams { v_max, v_min, angle, t_d }
}

/// `M = max(0, (1/V_min - 1/V_vac) / 2)`.
pub fn metrological_power(state: &GaussianState) -> f64 {
    let (v_min, _) = state.eigenvalues();
    (0.5 * (1.0 / v_min - 1.0 / V_VAC)).max(0.0)
}

/// Two-mode small-squeezing estimate of `V_min`,
/// `1/2 + T1 r1^2 - sqrt((T1 r1 + T2 r2)^2 + 2 T1 T2 r1 r2 (cos phi - 1))`
/// with `phi = 2 (arg theta1 - arg theta2)`.
pub fn vmin_approx(t1: f64, t2: f64, r1: f64, r2: f64, theta1: Complex64, theta2: Complex64) -> f64 {
    let phi = 2.0 * (theta1.arg() - theta2.arg());
    let lin = t1 * r1 + t2 * r2;
    let rad = lin * lin + 2.0 * t1 * t2 * r1 * r2 * (phi.cos() - 1.0);
    0.5 + t1 * r1 * r1 - rad.max(0.0).sqrt()
}

/// Thermal occupation with `4 n (n + 1) = V_max V_min / V_vac^2 - 1`.
pub fn thermal_photon_number(params: &EllipseParams, tol: f64) -> Result<f64> {
    let product = params.v_max * params.v_min;
    if product < V_VAC * V_VAC - tol {
        return Err(Error::UnphysicalCovariance { product });
    }
    let excess = (product / (V_VAC * V_VAC) - 1.0).max(0.0);
    // n = (sqrt(1 + excess) - 1) / 2, written to avoid cancellation.
    Ok(0.5 * excess / ((1.0 + excess).sqrt() + 1.0))
}

/// Removes jumps of `pi` from an axis-angle series.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    for (i, &a) in angles.iter().enumerate() {
        if i > 0 {
            let prev = angles[i - 1] + offset;
            let cur = a + offset;
            offset += -PI * ((cur - prev) / PI).round();
        }
        out.push(a + offset);
    }
    out
}

/// Central-difference derivative of the unwrapped angle (one-sided at the ends).
pub fn angular_velocity(t_d: &[f64], angles: &[f64]) -> Vec<f64> {
    let u = unwrap_angles(angles);
    let n = u.len();
    (0..n)
        .map(|i| {
            let (a, b) = match (i, n) {
                (_, 1) => return 0.0,
                (0, _) => (0, 1),
                (i, n) if i == n - 1 => (n - 2, n - 1),
                (i, _) => (i - 1, i + 1),
            };
            (u[b] - u[a]) / (t_d[b] - t_d[a])
        })
        .collect()
}

/// Series of scalar diagnostics over the delay grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricSeries {
    pub t_d: Vec<f64>,
    pub metrological_power: Vec<f64>,
    pub origin_value: Vec<f64>,
    pub thermal_nbar: Vec<f64>,
}

/// Position and value of the most negative entry of an origin-value series.
pub fn negativity_trace(t_d: &[f64], origin: &[f64]) -> (f64, f64) {
    argextreme(t_d, origin, |a, b| a < b)
}

/// Position and value of the largest entry.
pub fn peak(t_d: &[f64], values: &[f64]) -> (f64, f64) {
    argextreme(t_d, values, |a, b| a > b)
}

fn argextreme(t: &[f64], v: &[f64], better: impl Fn(f64, f64) -> bool) -> (f64, f64) {
    let mut best = 0;
    for i in 1..v.len() {
        if better(v[i], v[best]) {
            best = i;
        }
    }
    (t[best], v[best])
}
