//! Recovery of the dominant mode from the Gaussian TRWF series alone.

use num_complex::Complex64;
use subcycle_core::grid::TimeGrid;
use subcycle_core::kernel::field_modes;
use subcycle_core::phase_space::GaussianState;
use subcycle_core::tomography::{deconvolve, extract_mode};

use super::{ctx, Stage};
use crate::bundle::Bundle;
use crate::config::ExperimentConfig;
use crate::error::AppResult;
use crate::svg::{self, Series};
use crate::table::Table;

pub(super) fn run(cfg: &ExperimentConfig, b: &mut Bundle) -> AppResult<()> {
    let e = ctx(cfg);
    let st = Stage::build(cfg, b)?;
    let c = cfg.field_norm_constant;
    let series: Vec<(f64, GaussianState)> = (0..st.delays.len()).map(|k| (st.delays[k], st.state(k))).collect();
    let ex = extract_mode(&series, &st.gate, c, cfg.extraction.variance_tol).map_err(&e)?;
    let alpha = deconvolve(&ex.delays, &ex.theta, &st.gate, c, cfg.extraction.epsilon);

    let mut et = Table::new(&["t_d_fs", "theta_re", "theta_im", "r_local", "true_theta_re", "true_theta_im"]);
    for (k, (t, s)) in series.iter().enumerate() {
        let truth = st.proj.theta[(0, k)];
        let th = ex.theta[k];
        et.push(vec![*t, th.re, th.im, local_r(s, cfg.extraction.variance_tol), truth.re, truth.im]);
    }

    let tgrid = TimeGrid::new(cfg.gate.t_d_min_fs, cfg.gate.t_d_max_fs, st.delays.len()).map_err(&e)?;
    let truth = field_modes(&st.modes, &tgrid, c);
    let truth: Vec<Complex64> = (0..st.delays.len()).map(|l| truth[(0, l)]).collect();
    let mut at = Table::new(&["t_fs", "alpha_re", "alpha_im", "true_re", "true_im"]);
    for (k, t) in st.delays.iter().enumerate() {
        at.push(vec![*t, alpha[k].re, alpha[k].im, truth[k].re, truth[k].im]);
    }

    let mut summary = Table::new(&["r_extracted", "r_true", "abs_overlap", "complex_overlap"]);
    let abs_a: Vec<Complex64> = alpha.iter().map(|a| Complex64::new(a.norm(), 0.0)).collect();
    let abs_t: Vec<Complex64> = truth.iter().map(|a| Complex64::new(a.norm(), 0.0)).collect();
    summary.push(vec![ex.r, st.modes.r[0], overlap(&abs_a, &abs_t), overlap(&alpha, &truth)]);

    let mags: Vec<(&str, Vec<f64>)> =
        vec![("recovered", alpha.iter().map(|a| a.norm()).collect()), ("true", truth.iter().map(|a| a.norm()).collect())];
    let plot: Vec<Series<'_>> = mags.iter().map(|(n, y)| Series { name: n, x: &st.delays, y }).collect();
    b.insert("alpha.svg", svg::line_plot("Field mode |alpha(t)|", "t (fs)", "|alpha|", &plot));
    b.insert("extraction.csv", et.to_csv());
    b.insert("alpha.csv", at.to_csv());
    b.insert("extraction_summary.csv", summary.to_csv());
    Ok(())
}

/// Single-mode squeezing implied by one covariance, 0 where nothing is squeezed.
fn local_r(s: &GaussianState, tol: f64) -> f64 {
    let (vmin, vmax) = s.eigenvalues();
    if vmax <= 0.5 + tol || vmin >= 0.5 {
        return 0.0;
    }
    0.5 * ((2.0 * vmax - 1.0) / (1.0 - 2.0 * vmin)).ln()
}

/// `|<a|b>| / (|a| |b|)`.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    n.norm() / (na * nb).sqrt()
}
