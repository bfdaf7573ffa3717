//! Weak squeezing, where photon subtraction approaches a single-photon state.

use rayon::prelude::*;
use subcycle_core::metrics::metrological_power;
use subcycle_core::phase_space::{subtracted_density, SubtractedState};

use super::{ctx, delay_tag, emit_wigner, fock_tables, phase_axis, photon_numbers, Stage};
use crate::bundle::Bundle;
use crate::config::ExperimentConfig;
use crate::error::AppResult;
use crate::svg::{self, Series};
use crate::table::Table;

pub(super) fn run(cfg: &ExperimentConfig, b: &mut Bundle) -> AppResult<()> {
    let st = Stage::build(cfg, b)?;
    let sub = SubtractedState::from_squeezing(&st.modes.r).map_err(ctx(cfg))?;
    let ax = phase_axis(cfg);
    let n_max = cfg.phase_space.photon_n_max;
    let fock = fock_tables(ax, n_max);

    let rows: Vec<Vec<f64>> = (0..st.delays.len())
        .into_par_iter()
        .map(|k| {
            let state = st.state(k);
            let w = subtracted_density(&state, &st.mode_matrices(k), &sub.weights, ax, ax);
            let mut row = vec![st.delays[k]];
            row.extend(photon_numbers(&w, &fock));
            row.push(w.origin_value());
            row.push(metrological_power(&state));
            row
        })
        .collect();

    let mut h = vec!["t_d_fs".to_string()];
    h.extend((0..=n_max).map(|n| format!("p{n}")));
    h.extend(["origin_sub".to_string(), "metrological_power".to_string()]);
    let mut t = Table::new(&h);
    for r in rows {
        t.push(r);
    }
    let cols: Vec<(String, Vec<f64>)> =
        (0..=n_max.min(3)).map(|n| (format!("P({n})"), t.column(&format!("p{n}")).unwrap_or_default())).collect();
    let series: Vec<Series<'_>> = cols.iter().map(|(n, y)| Series { name: n, x: &st.delays, y }).collect();
    b.insert("photon_numbers.svg", svg::line_plot("Photon-number distribution", "t_d (fs)", "P(n)", &series));
    b.insert("photon_numbers.csv", t.to_csv());

    for &ts in &cfg.phase_space.snapshots_fs {
        let k = st.delay_index(ts);
        let w = subtracted_density(&st.state(k), &st.mode_matrices(k), &sub.weights, ax, ax);
        let td = st.delays[k];
        emit_wigner(b, &format!("trwf_sub_td{}", delay_tag(td)), &format!("W_sub at t_d = {td} fs"), &w);
    }
    Ok(())
}
