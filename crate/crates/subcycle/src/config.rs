//! Experiment configuration.
//!
//! A config file is a JSON object with unit-suffixed field names. Only the
//! fields that differ from the scenario preset need to be given; the rest is
//! filled in from [`ExperimentConfig::preset`]. A manifest written by `run` is
//! also accepted, in which case its embedded config is used.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{AppError, AppResult, FieldError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Squeezed,
    Subtracted,
    SinglePhoton,
    Eos,
    Reconstruct,
    ExtractMode,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Squeezed,
        Scenario::Subtracted,
        Scenario::SinglePhoton,
        Scenario::Eos,
        Scenario::Reconstruct,
        Scenario::ExtractMode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Squeezed => "squeezed",
            Scenario::Subtracted => "subtracted",
            Scenario::SinglePhoton => "single-photon",
            Scenario::Eos => "eos",
            Scenario::Reconstruct => "reconstruct",
            Scenario::ExtractMode => "extract-mode",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Squeezed => "pulsed squeezed vacuum: principal modes, transmissions, TRWF series and Gram-Charlier scan",
            Scenario::Subtracted => "photon-subtracted state: negativity trace, photon statistics and reconstruction distances",
            Scenario::SinglePhoton => "weak-squeezing limit: single-photon probability over the delay",
            Scenario::Eos => "electro-optic sampling: filter scan, THz modes and vacuum fluctuations",
            Scenario::Reconstruct => "simulated homodyne data: moment estimation, Gram-Charlier and inverse Radon",
            Scenario::ExtractMode => "dominant-mode extraction from the TRWF series",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub r_eff: f64,
    pub delta_d_fs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub delta_p_fs: f64,
    pub cep_phase_rad: f64,
    pub t_d_min_fs: f64,
    pub t_d_max_fs: f64,
    pub t_d_step_fs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub f_min_thz: f64,
    pub f_max_thz: f64,
    pub n_freq: usize,
    pub t_half_width_fs: f64,
    /// Repeat the decomposition at twice the frequency resolution.
    pub convergence_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    /// Modes with `sinh r` below this are treated as vacuum.
    pub truncation_threshold: f64,
    /// Smallest accepted |u^dag P v*| / cosh r when fixing the mode phases.
    pub min_alignment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceConfig {
    pub half_width: f64,
    pub points: usize,
    pub snapshots_fs: Vec<f64>,
    pub photon_n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub gc_orders: Vec<usize>,
    pub radon_phases: usize,
    pub samples_per_phase: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EosConfig {
    pub probe_center_thz: f64,
    pub probe_width_thz: f64,
    pub boundary_thz: f64,
    pub top_thz: f64,
    pub n_thz: usize,
    pub n_nir: usize,
    pub cutoff_min_thz: f64,
    pub cutoff_max_thz: f64,
    pub cutoff_step_thz: f64,
    pub t_half_width_fs: f64,
    pub phi_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionConfig {
    pub epsilon: f64,
    /// Excess of `V_max` over vacuum below which a delay counts as unsqueezed.
    pub variance_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub field_norm_constant: f64,
    pub pulse: PulseConfig,
    pub gate: GateConfig,
    pub grid: GridConfig,
    pub modes: ModeConfig,
    pub phase_space: PhaseSpaceConfig,
    pub reconstruction: ReconstructionConfig,
    pub eos: EosConfig,
    pub extraction: ExtractionConfig,
}

impl ExperimentConfig {
    /// Full default configuration of a scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let mut c = Self {
            scenario,
            seed: 0,
            field_norm_constant: 1.0,
            pulse: PulseConfig { r_eff: 5.0, delta_d_fs: 16.0 },
            gate: GateConfig {
                delta_p_fs: 5.8,
                cep_phase_rad: 0.0,
                t_d_min_fs: -40.0,
                t_d_max_fs: 40.0,
                t_d_step_fs: 0.1,
            },
            grid: GridConfig {
                f_min_thz: 0.1,
                f_max_thz: 400.0,
                n_freq: 600,
                t_half_width_fs: 120.0,
                convergence_check: false,
            },
            modes: ModeConfig { truncation_threshold: 1e-3, min_alignment: subcycle_core::kernel::MIN_ALIGNMENT },
            phase_space: PhaseSpaceConfig {
                half_width: 6.0,
                points: 241,
                snapshots_fs: vec![-14.1],
                photon_n_max: 3,
            },
            reconstruction: ReconstructionConfig { gc_orders: vec![2], radon_phases: 64, samples_per_phase: 100_000 },
            eos: EosConfig {
                probe_center_thz: 255.0,
                probe_width_thz: 33.0,
                boundary_thz: 130.0,
                top_thz: 450.0,
                n_thz: 260,
                n_nir: 500,
                cutoff_min_thz: 150.0,
                cutoff_max_thz: 450.0,
                cutoff_step_thz: 2.0,
                t_half_width_fs: 100.0,
                phi_points: 73,
            },
            extraction: ExtractionConfig { epsilon: 1e-3, variance_tol: 1e-12 },
        };
        match scenario {
            Scenario::Squeezed => {
                c.grid.convergence_check = true;
            }
            Scenario::Subtracted => {
                c.phase_space.snapshots_fs = vec![-13.8];
            }
            Scenario::SinglePhoton => {
                c.pulse.r_eff = 0.1;
                c.gate.delta_p_fs = 18.47;
                c.gate.t_d_min_fs = -10.0;
                c.gate.t_d_max_fs = 10.0;
                c.gate.t_d_step_fs = 0.02;
                c.modes.truncation_threshold = 1e-4;
                c.phase_space.snapshots_fs = vec![-0.26];
            }
            Scenario::Eos => {
                c.pulse.r_eff = 1.0;
            }
            Scenario::Reconstruct => {
                c.phase_space.snapshots_fs = vec![-13.8];
                c.reconstruction.gc_orders = vec![2, 4];
            }
            Scenario::ExtractMode => {
                c.pulse.r_eff = 0.1;
                c.gate.t_d_step_fs = 0.2;
                c.modes.truncation_threshold = 1e-4;
                c.phase_space.snapshots_fs = vec![];
            }
        }
        c
    }

    /// Parses a config (or a manifest) from JSON text.
    pub fn from_json(text: &str) -> AppResult<Self> {
        let user: Value = serde_json::from_str(text)
            .map_err(|e| AppError::config("<document>", format!("not valid JSON: {e}")))?;
        let user = match user {
            Value::Object(mut m) if m.contains_key("files") && m.contains_key("config") => {
                m.remove("config").unwrap_or(Value::Null)
            }
            other => other,
        };
        let Value::Object(user) = user else {
            return Err(AppError::config("<document>", "expected a JSON object"));
        };
        let scenario = match user.get("scenario") {
            Some(Value::String(s)) => Scenario::parse(s).ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                AppError::config("scenario", format!("unknown scenario `{s}`, expected one of {}", names.join(", ")))
            })?,
            Some(_) => return Err(AppError::config("scenario", "expected a string")),
            None => return Err(AppError::config("scenario", "missing")),
        };
        let mut merged = serde_json::to_value(Self::preset(scenario)).expect("preset serialises");
        let mut errors = Vec::new();
        merge(&mut merged, &Value::Object(user), "", &mut errors);
        if !errors.is_empty() {
            return Err(AppError::ConfigInvalid(errors));
        }
        let cfg: Self = serde_json::from_value(merged).map_err(|e| AppError::config("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Delay grid `t_d_min, t_d_min + step, ...` up to `t_d_max`.
    pub fn delays(&self) -> Vec<f64> {
        let g = &self.gate;
        let n = ((g.t_d_max_fs - g.t_d_min_fs) / g.t_d_step_fs + 1e-9).floor() as usize + 1;
        (0..n).map(|i| round_fs(g.t_d_min_fs + i as f64 * g.t_d_step_fs)).collect()
    }

    /// Checks every numeric precondition and reports all violations at once.
    pub fn validate(&self) -> AppResult<()> {
        let mut e = Vec::new();
        let mut positive = |field: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                e.push(FieldError { field: field.into(), message: format!("must be positive and finite, got {v}") });
            }
        };
        positive("field_norm_constant", self.field_norm_constant);
        positive("pulse.delta_d_fs", self.pulse.delta_d_fs);
        positive("gate.delta_p_fs", self.gate.delta_p_fs);
        positive("gate.t_d_step_fs", self.gate.t_d_step_fs);
        positive("grid.f_min_thz", self.grid.f_min_thz);
        positive("grid.t_half_width_fs", self.grid.t_half_width_fs);
        positive("modes.truncation_threshold", self.modes.truncation_threshold);
        positive("phase_space.half_width", self.phase_space.half_width);
        positive("eos.probe_center_thz", self.eos.probe_center_thz);
        positive("eos.probe_width_thz", self.eos.probe_width_thz);
        positive("eos.boundary_thz", self.eos.boundary_thz);
        positive("eos.cutoff_step_thz", self.eos.cutoff_step_thz);
        positive("eos.t_half_width_fs", self.eos.t_half_width_fs);
        positive("extraction.epsilon", self.extraction.epsilon);
        positive("extraction.variance_tol", self.extraction.variance_tol);

        let mut check = |cond: bool, field: &str, message: &str| {
            if !cond {
                e.push(FieldError { field: field.into(), message: message.into() });
            }
        };
        check(self.pulse.r_eff >= 0.0 && self.pulse.r_eff.is_finite(), "pulse.r_eff", "must be non-negative");
        check((0.0..=1.0).contains(&self.modes.min_alignment), "modes.min_alignment", "must lie in [0, 1]");
        check(self.gate.cep_phase_rad.is_finite(), "gate.cep_phase_rad", "must be finite");
        check(self.gate.t_d_max_fs > self.gate.t_d_min_fs, "gate.t_d_max_fs", "must exceed gate.t_d_min_fs");
        check(self.grid.f_max_thz > self.grid.f_min_thz, "grid.f_max_thz", "must exceed grid.f_min_thz");
        check(self.grid.n_freq >= 16, "grid.n_freq", "must be at least 16");
        check(self.phase_space.points >= 16, "phase_space.points", "must be at least 16");
        check(
            self.reconstruction.gc_orders.iter().all(|&o| (2..=20).contains(&o)),
            "reconstruction.gc_orders",
            "orders must lie in 2..=20",
        );
        check(self.reconstruction.radon_phases >= 16, "reconstruction.radon_phases", "needs at least 16 phases");
        check(self.reconstruction.samples_per_phase >= 10, "reconstruction.samples_per_phase", "must be at least 10");
        check(self.eos.top_thz > self.eos.boundary_thz, "eos.top_thz", "must exceed eos.boundary_thz");
        check(self.eos.n_thz >= 8 && self.eos.n_nir >= 8, "eos.n_thz", "eos grids need at least 8 points");
        check(
            self.eos.cutoff_max_thz >= self.eos.cutoff_min_thz && self.eos.cutoff_min_thz > self.eos.boundary_thz,
            "eos.cutoff_min_thz",
            "cutoff range must lie above eos.boundary_thz",
        );
        check(self.eos.phi_points >= 2, "eos.phi_points", "must be at least 2");
        let (lo, hi) = (self.gate.t_d_min_fs, self.gate.t_d_max_fs);
        for (i, s) in self.phase_space.snapshots_fs.iter().enumerate() {
            if !(*s >= lo && *s <= hi) {
                e.push(FieldError {
                    field: format!("phase_space.snapshots_fs[{i}]"),
                    message: format!("{s} fs lies outside the delay range [{lo}, {hi}]"),
                });
            }
        }
        if self.delays().len() > 200_000 {
            e.push(FieldError { field: "gate.t_d_step_fs".into(), message: "delay grid exceeds 200000 points".into() });
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(AppError::ConfigInvalid(e))
        }
    }
}

/// Rounds a delay to 1e-9 fs so that grid points print and compare cleanly.
pub fn round_fs(t: f64) -> f64 {
    (t * 1e9).round() / 1e9
}

/// Overlays `user` onto `base`, recording unknown fields and shape mismatches.
fn merge(base: &mut Value, user: &Value, path: &str, errors: &mut Vec<FieldError>) {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) => merge_objects(b, u, path, errors),
        (b, u) => {
            if same_shape(b, u) {
                *b = u.clone();
            } else {
                errors.push(FieldError {
                    field: path.to_string(),
                    message: format!("expected {}, got {}", kind(b), kind(u)),
                });
            }
        }
    }
}

fn merge_objects(b: &mut Map<String, Value>, u: &Map<String, Value>, path: &str, errors: &mut Vec<FieldError>) {
    for (k, v) in u {
        let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
        match b.get_mut(k) {
            Some(slot) => merge(slot, v, &p, errors),
            None => errors.push(FieldError { field: p, message: "unknown field".into() }),
        }
    }
}

fn same_shape(b: &Value, u: &Value) -> bool {
    match (b, u) {
        (Value::Number(bn), Value::Number(un)) => bn.is_f64() || un.is_u64() || (bn.is_i64() && un.is_i64()),
        (Value::Array(_), Value::Array(_)) => true,
        (Value::String(_), Value::String(_)) | (Value::Bool(_), Value::Bool(_)) => true,
        _ => false,
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(n) if n.is_f64() => "a number",
        Value::Number(_) => "a non-negative integer",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_preset() {
        let c = ExperimentConfig::from_json(r#"{"scenario": "squeezed", "gate": {"delta_p_fs": 24.5}}"#).unwrap();
        assert_eq!(c.gate.delta_p_fs, 24.5);
        assert_eq!(c.pulse.r_eff, 5.0);
    }

    #[test]
    fn reports_every_bad_field() {
        let err = ExperimentConfig::from_json(
            r#"{"scenario": "squeezed", "gate": {"delta_p": 1.0, "t_d_step_fs": "x"}, "bogus": 1}"#,
        )
        .unwrap_err();
        let AppError::ConfigInvalid(fields) = err else { panic!("wrong error") };
        let names: Vec<&str> = fields.iter().map(|f| f.field.as_str()).collect();
        assert!(names.contains(&"gate.delta_p"));
        assert!(names.contains(&"gate.t_d_step_fs"));
        assert!(names.contains(&"bogus"));
    }

    #[test]
    fn integer_fields_reject_fractions() {
        let err = ExperimentConfig::from_json(r#"{"scenario": "eos", "eos": {"n_thz": 2.5}}"#).unwrap_err();
        assert!(err.to_string().contains("eos.n_thz"));
    }

    #[test]
    fn preset_round_trips() {
        for s in Scenario::ALL {
            let c = ExperimentConfig::preset(s);
            assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
        }
    }
}
