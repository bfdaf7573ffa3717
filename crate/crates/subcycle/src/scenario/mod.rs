//! Scenario orchestration: each scenario turns a config into a [`Bundle`].
//!
//! Delay sweeps fan out over the rayon pool; every file is rendered into the
//! bundle in memory and written only once the whole run succeeded.

mod eos;
mod extract;
mod reconstruct;
mod single_photon;
mod squeezed;

use num_complex::Complex64;
use subcycle_core::detection::{project_modes, DetectionProjection, GatingFunction};
use subcycle_core::grid::{DrivingPulse, FrequencyGrid, SimConfig};
use subcycle_core::kernel::{bloch_messiah_with, compute_kernel, field_modes, kernel_time_grid, PrincipalModeSet};
use subcycle_core::phase_space::{mode_matrix, Axis, GaussianState, Mat2, WignerGrid};

use crate::bundle::Bundle;
use crate::config::{round_fs, ExperimentConfig, Scenario};
use crate::error::{AppError, AppResult};
use crate::svg::{self, Series};
use crate::table::Table;

/// Runs the configured scenario and returns the sealed bundle.
pub fn run(cfg: &ExperimentConfig) -> AppResult<Bundle> {
    cfg.validate()?;
    let mut b = Bundle::default();
    match cfg.scenario {
        Scenario::Squeezed => squeezed::run(cfg, false, &mut b)?,
        Scenario::Subtracted => squeezed::run(cfg, true, &mut b)?,
        Scenario::SinglePhoton => single_photon::run(cfg, &mut b)?,
        Scenario::Eos => eos::run(cfg, &mut b)?,
        Scenario::Reconstruct => reconstruct::run(cfg, &mut b)?,
        Scenario::ExtractMode => extract::run(cfg, &mut b)?,
    }
    b.seal(cfg);
    Ok(b)
}

/// Attaches the scenario name to a core error.
fn ctx(cfg: &ExperimentConfig) -> impl Fn(subcycle_core::Error) -> AppError {
    let scenario = cfg.scenario.name();
    move |source| AppError::Core { scenario, source }
}

/// Squeezer, principal modes and their projection onto the sliding gate.
struct Stage {
    pulse: DrivingPulse,
    modes: PrincipalModeSet,
    gate: GatingFunction,
    delays: Vec<f64>,
    proj: DetectionProjection,
    symplectic_defect: f64,
}

impl Stage {
    fn build(cfg: &ExperimentConfig, b: &mut Bundle) -> AppResult<Self> {
        let e = ctx(cfg);
        let pulse = DrivingPulse::new(cfg.pulse.delta_d_fs, cfg.pulse.r_eff).map_err(&e)?;
        let (modes, defect) = decompose(cfg, &pulse, cfg.grid.n_freq)?;
        let gate = GatingFunction::new(cfg.gate.delta_p_fs).map_err(&e)?.with_cep(cfg.gate.cep_phase_rad);
        let sim = SimConfig { field_norm_constant: cfg.field_norm_constant, rng_seed: cfg.seed, ..Default::default() };
        let delays = cfg.delays();
        let proj = project_modes(&modes, &gate, &delays, &sim).map_err(&e)?;
        let stage = Self { pulse, modes, gate, delays, proj, symplectic_defect: defect };
        stage.emit_common(cfg, b)?;
        Ok(stage)
    }

    fn m(&self) -> usize {
        self.modes.len()
    }

    fn state(&self, idx: usize) -> GaussianState {
        subcycle_core::phase_space::gaussian_trwf(&self.proj, &self.modes.r, idx)
    }

    fn mode_matrices(&self, idx: usize) -> Vec<Mat2> {
        self.proj.thetas_at(idx).iter().zip(&self.modes.r).map(|(t, r)| mode_matrix(*t, *r)).collect()
    }

    /// Index of the delay closest to `t`.
    fn delay_index(&self, t: f64) -> usize {
        nearest_index(&self.delays, t)
    }

    /// Spectrum, mode table, transmissions, projections, field modes and
    /// kernel diagnostics.
    fn emit_common(&self, cfg: &ExperimentConfig, b: &mut Bundle) -> AppResult<()> {
        let m = self.m();
        let mut spec = Table::new(&["index", "r", "retained"]);
        for (i, r) in self.modes.spectrum.iter().enumerate() {
            spec.push(vec![(i + 1) as f64, *r, if i < m { 1.0 } else { 0.0 }]);
        }
        b.insert("spectrum.csv", spec.to_csv());

        let mut mt = Table::new(&["mode", "r", "alignment"]);
        for j in 0..m {
            mt.push(vec![(j + 1) as f64, self.modes.r[j], self.modes.alignment[j]]);
        }
        b.insert("modes.csv", mt.to_csv());

        let mut diag = Table::new(&["n_freq", "symplectic_defect", "retained_modes", "truncation_loss"]);
        diag.push(vec![cfg.grid.n_freq as f64, self.symplectic_defect, m as f64, self.modes.truncation_loss()]);
        b.insert("kernel.csv", diag.to_csv());

        if cfg.grid.convergence_check {
            let (fine, _) = decompose(cfg, &self.pulse, 2 * cfg.grid.n_freq)?;
            let mut ct = Table::new(&["mode", "r", "r_refined", "relative_change"]);
            for j in 0..m {
                let rf = fine.r.get(j).copied().unwrap_or(0.0);
                ct.push(vec![(j + 1) as f64, self.modes.r[j], rf, (rf - self.modes.r[j]).abs() / self.modes.r[j]]);
            }
            b.insert("convergence.csv", ct.to_csv());
        }

        let mut header = vec!["t_d_fs".to_string()];
        header.extend((1..=m).map(|j| format!("T{j}")));
        header.extend(["theta_vac_sq".into(), "total".into()]);
        let mut tt = Table::new(&header);
        let mut ph = vec!["t_d_fs".to_string()];
        for j in 1..=m {
            ph.push(format!("theta{j}_re"));
            ph.push(format!("theta{j}_im"));
        }
        ph.push("theta_vac".into());
        let mut pt = Table::new(&ph);
        for (k, &t) in self.delays.iter().enumerate() {
            let mut row = vec![t];
            row.extend((0..m).map(|j| self.proj.transmissions[(j, k)]));
            let total = self.proj.total_transmission(k);
            row.push(self.proj.theta_vac[k].powi(2));
            row.push(total);
            tt.push(row);
            let mut row = vec![t];
            for j in 0..m {
                let th = self.proj.theta[(j, k)];
                row.push(th.re);
                row.push(th.im);
            }
            row.push(self.proj.theta_vac[k]);
            pt.push(row);
        }
        b.insert("transmissions.csv", tt.to_csv());
        b.insert("projections.csv", pt.to_csv());

        let shown = m.min(4);
        let cols: Vec<Vec<f64>> = (1..=shown).map(|j| tt.column(&format!("T{j}")).unwrap_or_default()).collect();
        let names: Vec<String> = (1..=shown).map(|j| format!("T{j}")).collect();
        let series: Vec<Series<'_>> =
            cols.iter().zip(&names).map(|(y, n)| Series { name: n, x: &self.delays, y }).collect();
        b.insert("transmissions.svg", svg::line_plot("Mode transmissions", "t_d (fs)", "|theta_j|^2", &series));

        let tgrid = subcycle_core::grid::TimeGrid::new(cfg.gate.t_d_min_fs, cfg.gate.t_d_max_fs, self.delays.len())
            .map_err(ctx(cfg))?;
        let alpha = field_modes(&self.modes, &tgrid, cfg.field_norm_constant);
        let mut fh = vec!["t_fs".to_string()];
        for j in 1..=shown {
            fh.push(format!("alpha{j}_re"));
            fh.push(format!("alpha{j}_im"));
        }
        let mut ft = Table::new(&fh);
        for (l, t) in tgrid.points().into_iter().enumerate() {
            let mut row = vec![round_fs(t)];
            for j in 0..shown {
                let a: Complex64 = alpha[(j, l)];
                row.push(a.re);
                row.push(a.im);
            }
            ft.push(row);
        }
        b.insert("field_modes.csv", ft.to_csv());
        Ok(())
    }
}

/// Kernel and Bloch-Messiah reduction at `n_freq` frequencies.
fn decompose(cfg: &ExperimentConfig, pulse: &DrivingPulse, n_freq: usize) -> AppResult<(PrincipalModeSet, f64)> {
    let e = ctx(cfg);
    let fgrid = FrequencyGrid::from_thz(cfg.grid.f_min_thz, cfg.grid.f_max_thz, n_freq).map_err(&e)?;
    let tgrid = kernel_time_grid(&fgrid, cfg.grid.t_half_width_fs).map_err(&e)?;
    let kernel = compute_kernel(pulse, &fgrid, &tgrid).map_err(&e)?;
    let defect = kernel.symplectic_defect();
    let modes = bloch_messiah_with(&kernel, cfg.modes.truncation_threshold, cfg.modes.min_alignment).map_err(&e)?;
    Ok((modes, defect))
}

fn nearest_index(values: &[f64], t: f64) -> usize {
    (0..values.len()).fold(0, |b, i| if (values[i] - t).abs() < (values[b] - t).abs() { i } else { b })
}

fn phase_axis(cfg: &ExperimentConfig) -> Axis {
    Axis::centered(cfg.phase_space.half_width, cfg.phase_space.points)
}

/// Fock-state Wigner functions on the phase-space grid, reused across delays.
fn fock_tables(ax: Axis, n_max: usize) -> Vec<WignerGrid> {
    (0..=n_max)
        .map(|n| WignerGrid::from_fn(ax, ax, |x, p| subcycle_core::phase_space::fock_wigner(n, x, p)))
        .collect()
}

/// `P(n) = 2 pi int W W_n`, clipped to `[0, 1]`.
fn photon_numbers(w: &WignerGrid, fock: &[WignerGrid]) -> Vec<f64> {
    fock.iter()
        .map(|f| {
            let s: f64 = w.values.iter().zip(&f.values).map(|(a, b)| a * b).sum();
            (2.0 * std::f64::consts::PI * s * w.cell()).clamp(0.0, 1.0)
        })
        .collect()
}

/// Long-format `x, p, W` table plus a contour plot.
fn emit_wigner(b: &mut Bundle, stem: &str, title: &str, w: &WignerGrid) {
    let mut t = Table::new(&["x", "p", "w"]);
    for ix in 0..w.x.n {
        for ip in 0..w.p.n {
            t.push(vec![w.x.point(ix), w.p.point(ip), w.at(ix, ip)]);
        }
    }
    b.insert(format!("{stem}.csv"), t.to_csv());
    b.insert(format!("{stem}.svg"), svg::contour_plot(title, &w.x.points(), &w.p.points(), &w.values, 8, "x", "p"));
}

/// File-name fragment for a delay, e.g. `m13.8` for -13.8 fs.
fn delay_tag(t: f64) -> String {
    let s = format!("{}", round_fs(t));
    match s.strip_prefix('-') {
        Some(rest) => format!("m{rest}"),
        None => s,
    }
}
