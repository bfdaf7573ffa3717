//! Squeezed vacuum and its photon-subtracted counterpart over the delay sweep.

use num_complex::Complex64;
use rayon::prelude::*;
use subcycle_core::metrics::{
    angular_velocity, metrological_power, squeeze_ellipse, thermal_photon_number, vmin_approx,
};
use subcycle_core::phase_space::{
    charfn_psq, charfn_sub, conjugate_axis, gaussian_density, hs_distance, subtracted_density, subtracted_value,
    wigner_from_charfn, GaussianState, SubtractedState,
};
use subcycle_core::tomography::{gram_charlier, MomentSet};

use super::{ctx, delay_tag, emit_wigner, fock_tables, phase_axis, photon_numbers, Stage};
use crate::bundle::Bundle;
use crate::config::ExperimentConfig;
use crate::error::AppResult;
use crate::svg::{self, Series};
use crate::table::Table;

/// Slack on `V_max V_min >= 1/4` before a covariance counts as unphysical.
const UNCERTAINTY_TOL: f64 = 1e-9;

struct DelayRow {
    metrics: Vec<f64>,
    angle: f64,
    gc: Vec<f64>,
}

pub(super) fn run(cfg: &ExperimentConfig, subtracted: bool, b: &mut Bundle) -> AppResult<()> {
    let e = ctx(cfg);
    let st = Stage::build(cfg, b)?;
    let sub = if subtracted { Some(SubtractedState::from_squeezing(&st.modes.r).map_err(&e)?) } else { None };
    let ax = phase_axis(cfg);
    let orders = &cfg.reconstruction.gc_orders;
    let m = st.m();
    let w_vac = gaussian_density(&GaussianState::vacuum(), ax, ax);

    let rows: Vec<DelayRow> = (0..st.delays.len())
        .into_par_iter()
        .map(|k| -> AppResult<DelayRow> {
            let t = st.delays[k];
            let state = st.state(k);
            let ell = squeeze_ellipse(&state, t);
            let nbar = thermal_photon_number(&ell, UNCERTAINTY_TOL).map_err(&e)?;
            let th = st.proj.thetas_at(k);
            let zero = Complex64::new(0.0, 0.0);
            let (t2, r2, th2) = if m >= 2 { (st.proj.transmissions[(1, k)], st.modes.r[1], th[1]) } else { (0.0, 0.0, zero) };
            let (t1, r1, th1) = if m >= 1 { (st.proj.transmissions[(0, k)], st.modes.r[0], th[0]) } else { (0.0, 0.0, zero) };
            let mut metrics = vec![
                t,
                state.cov[0][0],
                state.cov[0][1],
                state.cov[1][1],
                ell.v_min,
                ell.v_max,
                ell.angle,
                0.0,
                metrological_power(&state),
                vmin_approx(t1, t2, r1, r2, th1, th2),
                nbar,
            ];

            let w_psq = gaussian_density(&state, ax, ax);
            let mut gc = vec![t];
            for &o in orders {
                let rec = gram_charlier(&MomentSet::from_gaussian(&state, o), ax, ax);
                gc.push(hs_distance(&w_psq, &rec).map_err(&e)?);
            }
            gc.push(hs_distance(&w_psq, &w_vac).map_err(&e)?);
            if let Some(sub) = &sub {
                let mats = st.mode_matrices(k);
                metrics.push(subtracted_value(&state, &mats, &sub.weights, 0.0, 0.0));
                let w_sub = subtracted_density(&state, &mats, &sub.weights, ax, ax);
                for &o in orders {
                    let rec = gram_charlier(&MomentSet::from_wigner(&w_sub, o), ax, ax);
                    gc.push(hs_distance(&w_sub, &rec).map_err(&e)?);
                }
                gc.push(hs_distance(&w_sub, &w_vac).map_err(&e)?);
            }
            Ok(DelayRow { metrics, angle: ell.angle, gc })
        })
        .collect::<AppResult<_>>()?;

    let mut mh: Vec<String> = [
        "t_d_fs",
        "sxx",
        "sxp",
        "spp",
        "v_min",
        "v_max",
        "angle_rad",
        "angular_velocity_rad_per_fs",
        "metrological_power",
        "vmin_approx",
        "thermal_nbar",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if subtracted {
        mh.push("origin_sub".into());
    }
    let angles: Vec<f64> = rows.iter().map(|r| r.angle).collect();
    let omega = angular_velocity(&st.delays, &angles);
    let mut mt = Table::new(&mh);
    for (r, w) in rows.iter().zip(&omega) {
        let mut row = r.metrics.clone();
        row[7] = *w;
        mt.push(row);
    }

    let mut gh = vec!["t_d_fs".to_string()];
    gh.extend(orders.iter().map(|o| format!("psq_order{o}")));
    gh.push("psq_vs_vacuum".into());
    if subtracted {
        gh.extend(orders.iter().map(|o| format!("sub_order{o}")));
        gh.push("sub_vs_vacuum".into());
    }
    let mut gt = Table::new(&gh);
    for r in &rows {
        gt.push(r.gc.clone());
    }

    let mp = mt.column("metrological_power").unwrap_or_default();
    let mut curves = vec![("metrological power", mp)];
    if subtracted {
        curves.push(("W_sub(0,0)", mt.column("origin_sub").unwrap_or_default()));
    }
    let series: Vec<Series<'_>> = curves.iter().map(|(n, y)| Series { name: n, x: &st.delays, y }).collect();
    b.insert("metrics.svg", svg::line_plot("Metrological power and negativity", "t_d (fs)", "value", &series));
    b.insert("metrics.csv", mt.to_csv());
    b.insert("gc_scan.csv", gt.to_csv());

    snapshots(cfg, &st, sub.as_ref(), b)
}

/// TRWF grids, photon statistics and the characteristic-function cross-check
/// at the configured snapshot delays.
fn snapshots(cfg: &ExperimentConfig, st: &Stage, sub: Option<&SubtractedState>, b: &mut Bundle) -> AppResult<()> {
    let e = ctx(cfg);
    let ax = phase_axis(cfg);
    let n_max = cfg.phase_space.photon_n_max;
    let fock = fock_tables(ax, n_max);
    let mut ph = vec!["t_d_fs".to_string()];
    ph.extend((0..=n_max).map(|n| format!("psq_p{n}")));
    if sub.is_some() {
        ph.extend((0..=n_max).map(|n| format!("sub_p{n}")));
    }
    let mut pt = Table::new(&ph);
    let mut rt = Table::new(&["t_d_fs", "psq_route_diff", "sub_route_diff", "psq_norm", "sub_norm"]);

    for &ts in &cfg.phase_space.snapshots_fs {
        let k = st.delay_index(ts);
        let t = st.delays[k];
        let tag = delay_tag(t);
        let state = st.state(k);
        let thetas = st.proj.thetas_at(k);
        let tv = st.proj.theta_vac[k];
        let uv = conjugate_axis(&ax, state.eigenvalues().0);

        let w_psq = gaussian_density(&state, ax, ax);
        emit_wigner(b, &format!("trwf_psq_td{tag}"), &format!("W_psq at t_d = {t} fs"), &w_psq);
        let route = wigner_from_charfn(&charfn_psq(&thetas, tv, &st.modes.r, uv, uv), ax, ax).map_err(&e)?;
        let psq_diff = max_abs_diff(&w_psq.values, &route.values);
        let mut prow = vec![t];
        prow.extend(photon_numbers(&w_psq, &fock));

        let (mut sub_diff, mut sub_norm) = (0.0, 0.0);
        if let Some(sub) = sub {
            let w_sub = subtracted_density(&state, &st.mode_matrices(k), &sub.weights, ax, ax);
            emit_wigner(b, &format!("trwf_sub_td{tag}"), &format!("W_sub at t_d = {t} fs"), &w_sub);
            let route =
                wigner_from_charfn(&charfn_sub(sub, &thetas, tv, &st.modes.r, uv, uv), ax, ax).map_err(&e)?;
            sub_diff = max_abs_diff(&w_sub.values, &route.values);
            sub_norm = w_sub.integral();
            prow.extend(photon_numbers(&w_sub, &fock));
        }
        pt.push(prow);
        rt.push(vec![t, psq_diff, sub_diff, w_psq.integral(), sub_norm]);
    }
    if !cfg.phase_space.snapshots_fs.is_empty() {
        b.insert("photon_probabilities.csv", pt.to_csv());
        b.insert("route_check.csv", rt.to_csv());
    }
    Ok(())
}

pub(super) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
