//! Electro-optic sampling: spectral-filter scan and the THz modes it selects.

use rayon::prelude::*;
use subcycle_core::eos::{
    eos_kernel, probe_mode, thz_modes, EosGrid, EosModes, ProbeSpectrum, ScanRow, SpectralFilter,
};
use subcycle_core::grid::{rad_fs_to_thz, thz_to_rad_fs, DrivingPulse};

use super::ctx;
use crate::bundle::Bundle;
use crate::config::ExperimentConfig;
use crate::error::AppResult;
use crate::svg::{self, Series};
use crate::table::Table;

pub(super) fn run(cfg: &ExperimentConfig, b: &mut Bundle) -> AppResult<()> {
    let e = ctx(cfg);
    let c = &cfg.eos;
    let pulse = DrivingPulse::new(cfg.pulse.delta_d_fs, cfg.pulse.r_eff).map_err(&e)?;
    let grid = EosGrid::from_thz(c.boundary_thz, c.top_thz, c.n_thz, c.n_nir).map_err(&e)?;
    let kernel = eos_kernel(&pulse, &grid, c.t_half_width_fs).map_err(&e)?;
    let probe = ProbeSpectrum::from_thz(c.probe_center_thz, c.probe_width_thz).map_err(&e)?;

    let n_cut = ((c.cutoff_max_thz - c.cutoff_min_thz) / c.cutoff_step_thz + 1e-9).floor() as usize + 1;
    let cutoffs: Vec<f64> = (0..n_cut).map(|i| c.cutoff_min_thz + i as f64 * c.cutoff_step_thz).collect();
    let rows: Vec<ScanRow> = cutoffs
        .par_iter()
        .map(|&f| {
            let wc = thz_to_rad_fs(f);
            let mode = probe_mode(&probe, &SpectralFilter::new(wc)?, &grid)?;
            let k = thz_modes(&kernel, &mode).commutators();
            Ok(ScanRow { omega_max: wc, alpha_comm: k.alpha, beta_comm: k.beta, shot_noise: mode.shot_noise })
        })
        .collect::<subcycle_core::Result<_>>()
        .map_err(&e)?;
    let best = rows.iter().fold(rows[0], |b, r| if r.beta_comm > b.beta_comm { *r } else { b });

    let mut st = Table::new(&["cutoff_thz", "alpha_comm", "beta_comm", "shot_noise"]);
    for (f, r) in cutoffs.iter().zip(&rows) {
        st.push(vec![*f, r.alpha_comm, r.beta_comm, r.shot_noise]);
    }
    let scan_plot = [
        ("[a, a^dag]/N", st.column("alpha_comm").unwrap_or_default()),
        ("[b, b^dag]/N", st.column("beta_comm").unwrap_or_default()),
    ];
    let series: Vec<Series<'_>> = scan_plot.iter().map(|(n, y)| Series { name: n, x: &cutoffs, y }).collect();
    b.insert("filter_scan.svg", svg::line_plot("Commutators versus filter cutoff", "cutoff (THz)", "relative commutator", &series));
    b.insert("filter_scan.csv", st.to_csv());

    let modes_for = |filter: SpectralFilter| -> AppResult<EosModes> {
        Ok(thz_modes(&kernel, &probe_mode(&probe, &filter, &grid).map_err(&e)?))
    };
    let open = modes_for(SpectralFilter::unfiltered())?;
    let opt = modes_for(SpectralFilter::new(best.omega_max).map_err(&e)?)?;

    let f_thz: Vec<f64> = opt.omega.iter().map(|w| rad_fs_to_thz(*w)).collect();
    let mut mt = Table::new(&["f_thz", "alpha_abs", "beta_abs", "beta_re", "beta_im", "beta_abs_unfiltered"]);
    for i in 0..f_thz.len() {
        let (a, bb) = (opt.alpha[i], opt.beta[i]);
        mt.push(vec![f_thz[i], a.norm(), bb.norm(), bb.re, bb.im, open.beta[i].norm()]);
    }
    let prof = [
        ("optimum", mt.column("beta_abs").unwrap_or_default()),
        ("unfiltered", mt.column("beta_abs_unfiltered").unwrap_or_default()),
    ];
    let series: Vec<Series<'_>> = prof.iter().map(|(n, y)| Series { name: n, x: &f_thz, y }).collect();
    b.insert("beta_mode.svg", svg::line_plot("THz mode |beta|", "f (THz)", "|beta|", &series));
    b.insert("beta_mode.csv", mt.to_csv());

    let np = c.phi_points;
    let phis: Vec<f64> = (0..np).map(|i| std::f64::consts::PI * i as f64 / (np - 1) as f64).collect();
    let mut vt = Table::new(&["phi_rad", "unfiltered", "optimum"]);
    for &phi in &phis {
        vt.push(vec![phi, open.vacuum_fluct(phi), opt.vacuum_fluct(phi)]);
    }
    let vf = [
        ("unfiltered", vt.column("unfiltered").unwrap_or_default()),
        ("optimum", vt.column("optimum").unwrap_or_default()),
    ];
    let series: Vec<Series<'_>> = vf.iter().map(|(n, y)| Series { name: n, x: &phis, y }).collect();
    b.insert("vacuum_fluct.svg", svg::line_plot("Vacuum fluctuations", "phi (rad)", "dS^2 / N", &series));
    b.insert("vacuum_fluct.csv", vt.to_csv());

    let mut ct = Table::new(&[
        "cutoff_thz",
        "alpha_comm",
        "beta_comm",
        "cross_re",
        "cross_im",
        "alpha_comm_time",
        "beta_comm_time",
    ]);
    for (cut, m) in [(f64::INFINITY, &open), (rad_fs_to_thz(best.omega_max), &opt)] {
        let f = m.commutators();
        let t = m.commutators_time_domain();
        ct.push(vec![cut, f.alpha, f.beta, f.cross.re, f.cross.im, t.alpha, t.beta]);
    }
    b.insert("commutators.csv", ct.to_csv());
    Ok(())
}
