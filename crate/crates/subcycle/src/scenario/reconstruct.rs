//! Simulated homodyne measurement and the two reconstruction routes:
//! Gram-Charlier from estimated moments and filtered back-projection.

use rayon::prelude::*;
use subcycle_core::phase_space::{gaussian_density, hs_distance, subtracted_density, Axis, SubtractedState};
use subcycle_core::tomography::{
    default_phases, estimate_moments, gram_charlier, inverse_radon, marginals_from_wigner, sample_quadratures,
    stream_id, MarginalSet, MomentSet, QuadratureSampleSet, QuadratureSource,
};

use super::{ctx, delay_tag, emit_wigner, phase_axis, Stage};
use crate::bundle::Bundle;
use crate::config::ExperimentConfig;
use crate::error::AppResult;
use crate::table::Table;

/// Histogram bins across the quadrature axis for the sampled marginals.
const HISTOGRAM_BINS: usize = 61;

pub(super) fn run(cfg: &ExperimentConfig, b: &mut Bundle) -> AppResult<()> {
    let e = ctx(cfg);
    let st = Stage::build(cfg, b)?;
    let sub = SubtractedState::from_squeezing(&st.modes.r).map_err(&e)?;
    let ax = phase_axis(cfg);
    let rc = &cfg.reconstruction;
    let phases = default_phases(rc.radon_phases);
    let max_order = rc.gc_orders.iter().copied().max().unwrap_or(2);

    let mut raw_h = vec!["t_d_fs".to_string(), "state".into(), "phase_rad".into()];
    raw_h.extend((1..=max_order).map(|k| format!("m{k}")));
    let mut raw_t = Table::new(&raw_h);
    let mut gc_t = Table::new(&["t_d_fs", "state", "order", "d_hs_exact_moments", "d_hs_estimated_moments"]);
    let mut radon_t = Table::new(&[
        "t_d_fs",
        "state",
        "d_hs_exact_marginals",
        "d_hs_sampled",
        "origin_true",
        "origin_exact_marginals",
        "origin_sampled",
    ]);
    let mut mc_t = Table::new(&["t_d_fs", "state", "samples", "max_moment_error"]);

    for &ts in &cfg.phase_space.snapshots_fs {
        let k = st.delay_index(ts);
        let t = st.delays[k];
        let state = st.state(k);
        let w_psq = gaussian_density(&state, ax, ax);
        let w_sub = subtracted_density(&state, &st.mode_matrices(k), &sub.weights, ax, ax);

        for (s, w) in [(0usize, &w_psq), (1, &w_sub)] {
            let source = if s == 0 { QuadratureSource::Gaussian(&state) } else { QuadratureSource::Wigner(w) };
            let sets: Vec<QuadratureSampleSet> = phases
                .par_iter()
                .enumerate()
                .map(|(i, &phi)| {
                    let stream = stream_id(i, 2 * k + s);
                    sample_quadratures(source, phi, t, rc.samples_per_phase, cfg.seed, stream)
                })
                .collect::<subcycle_core::Result<_>>()
                .map_err(&e)?;

            for set in &sets {
                let mut row = vec![t, s as f64, set.phase];
                row.extend((1..=max_order).map(|k| raw_moment(&set.samples, k)));
                raw_t.push(row);
            }

            let exact = if s == 0 { MomentSet::from_gaussian(&state, max_order) } else { MomentSet::from_wigner(w, max_order) };
            let estimated = estimate_moments(&sets, max_order).map_err(&e)?;
            for &o in &rc.gc_orders {
                let ge = gram_charlier(&truncate(&exact, o), ax, ax);
                let gs = gram_charlier(&truncate(&estimated, o), ax, ax);
                gc_t.push(vec![t, s as f64, o as f64, hs_distance(w, &ge).map_err(&e)?, hs_distance(w, &gs).map_err(&e)?]);
            }

            let from_exact = inverse_radon(&marginals_from_wigner(w, &phases), ax, ax).map_err(&e)?;
            let from_samples = inverse_radon(&histograms(&sets, ax.half_width()), ax, ax).map_err(&e)?;
            radon_t.push(vec![
                t,
                s as f64,
                hs_distance(w, &from_exact).map_err(&e)?,
                hs_distance(w, &from_samples).map_err(&e)?,
                w.origin_value(),
                from_exact.origin_value(),
                from_samples.origin_value(),
            ]);
            let name = if s == 0 { "psq" } else { "sub" };
            emit_wigner(
                b,
                &format!("radon_{name}_td{}", delay_tag(t)),
                &format!("Back-projected W_{name} from samples, t_d = {t} fs"),
                &from_samples,
            );

            let exact2 = truncate(&exact, 2);
            let mut n = rc.samples_per_phase;
            let mut sizes = Vec::new();
            while n >= 10 && sizes.len() < 3 {
                sizes.push(n);
                n /= 10;
            }
            for &n in sizes.iter().rev() {
                let prefix: Vec<QuadratureSampleSet> = sets
                    .iter()
                    .map(|q| QuadratureSampleSet { samples: q.samples[..n].to_vec(), ..q.clone() })
                    .collect();
                let est = estimate_moments(&prefix, 2).map_err(&e)?;
                mc_t.push(vec![t, s as f64, n as f64, max_moment_error(&est, &exact2)]);
            }
        }
    }
    b.insert("raw_moments.csv", raw_t.to_csv());
    b.insert("reconstruction.csv", gc_t.to_csv());
    b.insert("radon.csv", radon_t.to_csv());
    b.insert("mc_convergence.csv", mc_t.to_csv());
    Ok(())
}

fn raw_moment(x: &[f64], k: usize) -> f64 {
    x.iter().map(|v| v.powi(k as i32)).sum::<f64>() / x.len() as f64
}

fn truncate(m: &MomentSet, order: usize) -> MomentSet {
    MomentSet { order, values: m.values[..=order].to_vec() }
}

fn max_moment_error(a: &MomentSet, b: &MomentSet) -> f64 {
    let mut err: f64 = 0.0;
    for (ra, rb) in a.values.iter().zip(&b.values) {
        for (x, y) in ra.iter().zip(rb) {
            err = err.max((x - y).abs());
        }
    }
    err
}

/// Normalised histograms of the samples on a common quadrature axis.
fn histograms(sets: &[QuadratureSampleSet], half: f64) -> MarginalSet {
    let q = Axis::centered(half, HISTOGRAM_BINS);
    let pr = sets
        .iter()
        .map(|s| {
            let mut h = vec![0.0; q.n];
            for &x in &s.samples {
                let i = ((x - q.min) / q.step).round();
                if i >= 0.0 && (i as usize) < q.n {
                    h[i as usize] += 1.0;
                }
            }
            let scale = 1.0 / (s.samples.len() as f64 * q.step);
            h.iter().map(|c| c * scale).collect()
        })
        .collect();
    MarginalSet { phases: sets.iter().map(|s| s.phase).collect(), q, pr }
}
