//! JSON run configuration.
//!
//! Top-level keys are `system`, `modulation` and `run`; unknown keys are
//! rejected. Rates carry their unit in the key: `_hz` (multiplied by 2π),
//! `_rad_s`, or `_over_omega_m`. Every field is optional and falls back to
//! the reference parameter set.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classical::SettleOptions;
use crate::covariance::OrbitSource;
use crate::error::{Error, Result};
use crate::metrics::Mode;
use crate::params::{ModulationSpec, Model, SystemParams};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub mass: Option<f64>,
    pub omega_m_hz: Option<f64>,
    pub omega_m_rad_s: Option<f64>,
    pub gamma_m_hz: Option<f64>,
    pub gamma_m_rad_s: Option<f64>,
    pub temperature: Option<f64>,
    pub detuning_hz: Option<f64>,
    pub detuning_rad_s: Option<f64>,
    pub detuning_over_omega_m: Option<f64>,
    pub cavity_length: Option<f64>,
    pub kappa_hz: Option<f64>,
    pub kappa_rad_s: Option<f64>,
    pub laser_wavelength: Option<f64>,
    pub laser_power: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub omega_hz: Option<f64>,
    pub omega_rad_s: Option<f64>,
    pub omega_over_omega_m: Option<f64>,
    pub phi_rad: Option<f64>,
    pub phi_over_pi: Option<f64>,
}

/// Inclusive range sampled at `n` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        (0..self.n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub samples: Option<usize>,
    pub workers: Option<usize>,
    pub max_order: Option<usize>,
    pub orbit_source: Option<String>,
    pub discord_measured: Option<String>,
    pub rtol: Option<f64>,
    pub settle_tol: Option<f64>,
    pub min_periods: Option<usize>,
    pub max_periods: Option<usize>,
    /// Ω/ω_M axis of `sweep2d`.
    pub omega_over_omega_m: Option<Range>,
    /// ε axis of `sweep2d`.
    pub epsilon: Option<Range>,
    /// Number of φ points in [0, 2π) for `phase`.
    pub phase_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub modulation: ModulationSection,
    #[serde(default)]
    pub run: RunSection,
}

/// Numerical settings shared by every pipeline stage.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PipelineSettings {
    pub samples: usize,
    pub settle: SettleOptions,
    pub source: OrbitSource,
    pub measured: Mode,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            samples: 512,
            settle: SettleOptions::default(),
            source: OrbitSource::Interpolated,
            measured: Mode::Cavity,
        }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: Model,
    pub settings: PipelineSettings,
    pub workers: usize,
    pub max_order: usize,
    pub omega_axis: Range,
    pub epsilon_axis: Range,
    pub phase_points: usize,
    /// Unit interpretations applied while reading the file.
    pub notes: Vec<String>,
}

pub const DEFAULT_OMEGA_AXIS: Range = Range {
    min: 1.0,
    max: 3.0,
    n: 41,
};
pub const DEFAULT_EPSILON_AXIS: Range = Range {
    min: 0.0,
    max: 0.5,
    n: 26,
};

impl Default for RunConfig {
    fn default() -> Self {
        ConfigFile::default()
            .resolve()
            .expect("reference configuration is valid")
    }
}

fn pick(
    name: &'static str,
    options: &[(Option<f64>, f64)],
    default: f64,
) -> Result<f64> {
    let given: Vec<f64> = options.iter().filter_map(|(v, s)| v.map(|v| v * s)).collect();
    match given.as_slice() {
        [] => Ok(default),
        [v] => Ok(*v),
        _ => Err(Error::Config(format!("`{name}` given in more than one unit"))),
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let r = SystemParams::reference();
        let s = &self.system;
        let omega_m = pick(
            "omega_m",
            &[(s.omega_m_hz, TAU), (s.omega_m_rad_s, 1.0)],
            r.omega_m,
        )?;
        let system = SystemParams {
            mass: s.mass.unwrap_or(r.mass),
            omega_m,
            gamma_m: pick(
                "gamma_m",
                &[(s.gamma_m_hz, TAU), (s.gamma_m_rad_s, 1.0)],
                r.gamma_m,
            )?,
            temperature: s.temperature.unwrap_or(r.temperature),
            detuning: pick(
                "detuning",
                &[
                    (s.detuning_hz, TAU),
                    (s.detuning_rad_s, 1.0),
                    (s.detuning_over_omega_m, omega_m),
                ],
                r.detuning / r.omega_m * omega_m,
            )?,
            cavity_length: s.cavity_length.unwrap_or(r.cavity_length),
            kappa: pick("kappa", &[(s.kappa_hz, TAU), (s.kappa_rad_s, 1.0)], r.kappa)?,
            laser_wavelength: s.laser_wavelength.unwrap_or(r.laser_wavelength),
            laser_power: s.laser_power.unwrap_or(r.laser_power),
        };
        let mut notes = vec![if s.kappa_hz.is_some() {
            "kappa given in Hz and multiplied by 2*pi".to_string()
        } else {
            "kappa is an angular rate in rad/s; the reference 1.34e6 is used without a 2*pi factor"
                .to_string()
        }];
        if !system.markov_noise_valid() {
            notes.push(format!(
                "warning: omega_m/gamma_m = {:.3e} is below 100; Markovian noise model is questionable",
                system.quality_factor()
            ));
        }

        let m = &self.modulation;
        let omega = pick(
            "omega",
            &[
                (m.omega_hz, TAU),
                (m.omega_rad_s, 1.0),
                (m.omega_over_omega_m, omega_m),
            ],
            2.0 * omega_m,
        )?;
        let phi = pick("phi", &[(m.phi_rad, 1.0), (m.phi_over_pi, PI)], 0.0)?;
        let modulation = ModulationSpec::combined(
            m.epsilon.unwrap_or(0.0),
            m.eta.unwrap_or(0.0),
            omega,
            phi,
        );
        let model = Model::new(system, modulation)?;

        let run = &self.run;
        let mut settle = SettleOptions::default();
        if let Some(v) = run.rtol {
            settle.rtol = v;
        }
        if let Some(v) = run.settle_tol {
            settle.tol = v;
        }
        if let Some(v) = run.min_periods {
            settle.min_periods = v;
        }
        if let Some(v) = run.max_periods {
            settle.max_periods = v;
        }
        if !(settle.rtol > 0.0 && settle.tol > 0.0 && settle.max_periods >= settle.min_periods) {
            return Err(Error::Config("invalid settle options".into()));
        }
        let settings = PipelineSettings {
            samples: run.samples.unwrap_or(512),
            settle,
            source: match &run.orbit_source {
                Some(s) => s.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                None => OrbitSource::Interpolated,
            },
            measured: match &run.discord_measured {
                Some(s) => s.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                None => Mode::Cavity,
            },
        };
        if settings.samples < 4 {
            return Err(Error::Config("samples must be >= 4".into()));
        }
        let cfg = RunConfig {
            model,
            settings,
            workers: run.workers.unwrap_or(1).max(1),
            max_order: run.max_order.unwrap_or(2),
            omega_axis: run.omega_over_omega_m.unwrap_or(DEFAULT_OMEGA_AXIS),
            epsilon_axis: run.epsilon.unwrap_or(DEFAULT_EPSILON_AXIS),
            phase_points: run.phase_points.unwrap_or(64),
            notes,
        };
        for (name, r) in [("omega_over_omega_m", cfg.omega_axis), ("epsilon", cfg.epsilon_axis)] {
            if r.n == 0 || (r.n > 1 && !(r.max > r.min)) {
                return Err(Error::Config(format!("axis `{name}` must have n >= 1 and max > min")));
            }
        }
        if cfg.phase_points < 3 {
            return Err(Error::Config("phase_points must be >= 3".into()));
        }
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        ConfigFile::load(path)?.resolve()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ConfigFile::from_json(text)?.resolve()
    }

    /// JSON record of the resolved inputs and unit interpretations.
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "system": self.model.system,
            "derived": self.model.derived,
            "modulation": self.model.modulation,
            "settings": self.settings,
            "notes": self.notes,
            "constants": crate::params::constants::listing(),
        })
    }
}
