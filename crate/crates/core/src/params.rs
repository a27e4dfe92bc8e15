//! Physical inputs, derived rates and unit conventions.
//!
//! Every rate is stored as an angular frequency in rad/s. Values quoted as
//! ordinary frequencies (Hz) are multiplied by 2π when they are read from a
//! config file; see [`crate::config`].

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};

/// CODATA-2018 constants.
pub mod constants {
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J/K.
    pub const K_B: f64 = 1.380_649e-23;
    /// Speed of light in vacuum, m/s.
    pub const C: f64 = 299_792_458.0;

    /// Human-readable listing, one constant per line.
    pub fn listing() -> String {
        format!(
            "hbar = {HBAR:e} J s\nk_B  = {K_B:e} J/K\nc    = {C:e} m/s\n(CODATA 2018)"
        )
    }
}

use constants::{C, HBAR, K_B};

/// Quality factor below which the Markovian Brownian-noise model is flagged.
pub const MARKOV_Q_MIN: f64 = 100.0;

/// Raw physical inputs, SI units, rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    /// Mirror mass, kg.
    pub mass: f64,
    /// Mechanical angular frequency ω_M.
    pub omega_m: f64,
    /// Mechanical damping rate γ_M.
    pub gamma_m: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    /// Cavity-laser detuning Δ0.
    pub detuning: f64,
    /// Cavity length, m.
    pub cavity_length: f64,
    /// Cavity amplitude decay rate κ.
    pub kappa: f64,
    /// Laser wavelength, m.
    pub laser_wavelength: f64,
    /// Laser power, W.
    pub laser_power: f64,
}

impl SystemParams {
    /// Reference parameter set: m = 150 ng, ω_M/2π = 1 MHz, γ_M/2π = 1 Hz,
    /// T = 0.1 K, Δ0 = ω_M, l0 = 25 mm, κ = 1.34e6 rad/s, λ = 1064 nm,
    /// P = 10 mW.
    pub fn reference() -> Self {
        let omega_m = TAU * 1.0e6;
        Self {
            mass: 150e-12,
            omega_m,
            gamma_m: TAU * 1.0,
            temperature: 0.1,
            detuning: omega_m,
            cavity_length: 25e-3,
            kappa: 1.34e6,
            laser_wavelength: 1064e-9,
            laser_power: 10e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("cavity_length", self.cavity_length),
            ("kappa", self.kappa),
            ("laser_wavelength", self.laser_wavelength),
            ("laser_power", self.laser_power),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "temperature",
                reason: format!("must be finite and >= 0, got {}", self.temperature),
            });
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidParameter {
                name: "detuning",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Whether ω_M/γ_M is large enough for the Markov limit of the
    /// Brownian noise to be trusted.
    pub fn markov_noise_valid(&self) -> bool {
        self.quality_factor() > MARKOV_Q_MIN
    }
}

/// Rates entering the equations of motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Optical angular frequency ω_C = 2πc/λ.
    pub omega_c: f64,
    /// Laser angular frequency ω_L = ω_C − Δ0.
    pub omega_l: f64,
    /// Single-photon optomechanical coupling G0.
    pub g0: f64,
    /// Drive rate |E|, 1/s.
    pub drive: f64,
    /// Bose occupation of the mechanical bath.
    pub n_thermal: f64,
    /// coth(ħω_M / 2k_BT).
    pub coth_factor: f64,
}

/// Derive all rates from the raw inputs.
pub fn derive(p: &SystemParams) -> Result<DerivedParams> {
    p.validate()?;
    let omega_c = 2.0 * PI * C / p.laser_wavelength;
    let omega_l = omega_c - p.detuning;
    if omega_l <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "detuning",
            reason: "laser frequency ω_C − Δ0 must be positive".into(),
        });
    }
    let g0 = omega_c / p.cavity_length * (HBAR / (p.mass * p.omega_m)).sqrt();
    let drive = (2.0 * p.kappa * p.laser_power / (HBAR * omega_l)).sqrt();
    let (n_thermal, coth_factor) = if p.temperature == 0.0 {
        (0.0, 1.0)
    } else {
        let x = HBAR * p.omega_m / (K_B * p.temperature);
        (1.0 / x.exp_m1(), 1.0 / (0.5 * x).tanh())
    };
    Ok(DerivedParams {
        omega_c,
        omega_l,
        g0,
        drive,
        n_thermal,
        coth_factor,
    })
}

/// One or two sinusoidal modulations: ω²(t) = ω_M²[1 + ε cos Ω1 t] on the
/// spring and E[1 + η cos(Ω2 t + φ)] on the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulationSpec {
    pub epsilon: f64,
    pub omega1: f64,
    pub eta: f64,
    pub omega2: f64,
    /// Relative phase, reduced to [0, 2π).
    pub phi: f64,
}

impl ModulationSpec {
    pub fn none() -> Self {
        Self {
            epsilon: 0.0,
            omega1: 0.0,
            eta: 0.0,
            omega2: 0.0,
            phi: 0.0,
        }
    }

    /// Mechanical-frequency modulation only.
    pub fn mechanical(epsilon: f64, omega: f64) -> Self {
        Self {
            epsilon,
            omega1: omega,
            eta: 0.0,
            omega2: omega,
            phi: 0.0,
        }
    }

    /// Both modulations at a common frequency.
    pub fn combined(epsilon: f64, eta: f64, omega: f64, phi: f64) -> Self {
        Self {
            epsilon,
            omega1: omega,
            eta,
            omega2: omega,
            phi: phi.rem_euclid(TAU),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must satisfy 0 <= epsilon < 1, got {}", self.epsilon),
            });
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must be >= 0, got {}", self.eta),
            });
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                reason: "must be finite".into(),
            });
        }
        for (name, w, active) in [
            ("omega1", self.omega1, self.epsilon > 0.0),
            ("omega2", self.omega2, self.eta > 0.0),
        ] {
            if !w.is_finite() || w < 0.0 || (active && w == 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("modulation frequency must be > 0, got {w}"),
                });
            }
        }
        if self.epsilon > 0.0 && self.eta > 0.0 {
            let rel = (self.omega1 - self.omega2).abs() / self.omega1.max(self.omega2);
            if rel > 1e-12 {
                return Err(Error::InvalidParameter {
                    name: "omega2",
                    reason: "two active modulations must share one frequency".into(),
                });
            }
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.epsilon > 0.0 || self.eta > 0.0
    }

    /// Common modulation frequency Ω, or `None` when nothing is modulated.
    pub fn frequency(&self) -> Option<f64> {
        if self.epsilon > 0.0 {
            Some(self.omega1)
        } else if self.eta > 0.0 {
            Some(self.omega2)
        } else if self.omega1 > 0.0 {
            Some(self.omega1)
        } else if self.omega2 > 0.0 {
            Some(self.omega2)
        } else {
            None
        }
    }

    /// 1 + ε cos Ω1 t
    #[inline]
    pub fn spring_factor(&self, t: f64) -> f64 {
        1.0 + self.epsilon * (self.omega1 * t).cos()
    }

    /// 1 + η cos(Ω2 t + φ)
    #[inline]
    pub fn drive_factor(&self, t: f64) -> f64 {
        1.0 + self.eta * (self.omega2 * t + self.phi).cos()
    }
}

/// Complete model: raw inputs, derived rates and the modulation.
///
/// Fields are public so that studies can switch individual rates off
/// (e.g. `g0 = 0` for the decoupled limit) after derivation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    pub system: SystemParams,
    pub derived: DerivedParams,
    pub modulation: ModulationSpec,
}

impl Model {
    pub fn new(system: SystemParams, modulation: ModulationSpec) -> Result<Self> {
        let derived = derive(&system)?;
        let mut modulation = modulation;
        modulation.phi = modulation.phi.rem_euclid(TAU);
        modulation.validate()?;
        Ok(Self {
            system,
            derived,
            modulation,
        })
    }

    pub fn reference(modulation: ModulationSpec) -> Result<Self> {
        Self::new(SystemParams::reference(), modulation)
    }

    pub fn with_modulation(&self, modulation: ModulationSpec) -> Result<Self> {
        let mut m = *self;
        m.modulation = modulation;
        m.modulation.phi = m.modulation.phi.rem_euclid(TAU);
        m.modulation.validate()?;
        Ok(m)
    }

    /// Unmodulated copy of this model.
    pub fn unmodulated(&self) -> Self {
        let mut m = *self;
        m.modulation.epsilon = 0.0;
        m.modulation.eta = 0.0;
        m
    }

    /// Modulation period τ = 2π/Ω.
    pub fn period(&self) -> Option<f64> {
        self.modulation.frequency().map(|w| TAU / w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optical_frequency_matches_hand_value() {
        // 2π · 299792458 / 1064e-9 = 1.770349e15
        let d = derive(&SystemParams::reference()).unwrap();
        assert!((d.omega_c / 1.770_349e15 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coupling_and_drive_match_hand_values() {
        // G0 = ω_C/l0 · sqrt(ħ/(m ω_M)) = 7.0814e16 · 3.3451e-16 = 23.7 rad/s
        // |E| = sqrt(2 · 1.34e6 · 0.01 / (ħ ω_L)) = 3.79e11 1/s
        let d = derive(&SystemParams::reference()).unwrap();
        assert!((d.g0 - 23.7).abs() < 0.05, "g0 = {}", d.g0);
        assert!((d.drive / 3.79e11 - 1.0).abs() < 5e-3, "E = {}", d.drive);
    }

    #[test]
    fn thermal_occupation_at_reference_temperature() {
        // ħω/k_BT = 4.7992e-4 → 1/(e^x − 1) ≈ 2083.2
        let d = derive(&SystemParams::reference()).unwrap();
        assert!((d.n_thermal - 2083.16).abs() < 0.05, "n = {}", d.n_thermal);
        let rel = (d.coth_factor - (2.0 * d.n_thermal + 1.0)).abs() / d.coth_factor;
        assert!(rel < 1e-6);
        assert!(d.coth_factor >= 1.0);
    }

    #[test]
    fn zero_temperature_limit() {
        let mut p = SystemParams::reference();
        p.temperature = 0.0;
        let d = derive(&p).unwrap();
        assert_eq!(d.n_thermal, 0.0);
        assert_eq!(d.coth_factor, 1.0);
    }

    #[test]
    fn coupling_scales_as_inverse_sqrt_mass() {
        let base = SystemParams::reference();
        let reference = derive(&base).unwrap().g0 * base.mass.sqrt();
        for k in 0..=10 {
            let mut p = base;
            p.mass = base.mass * 10f64.powf(k as f64 / 10.0);
            let v = derive(&p).unwrap().g0 * p.mass.sqrt();
            assert!((v / reference - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn derive_is_bit_reproducible() {
        let p = SystemParams::reference();
        let a = derive(&p).unwrap();
        let b = derive(&p).unwrap();
        assert_eq!(a.g0.to_bits(), b.g0.to_bits());
        assert_eq!(a.drive.to_bits(), b.drive.to_bits());
        assert_eq!(a.coth_factor.to_bits(), b.coth_factor.to_bits());
    }

    #[test]
    fn coth_gap_shrinks_with_temperature() {
        let mut p = SystemParams::reference();
        let mut last = f64::INFINITY;
        for t in [1e-3, 1e-2, 0.1, 1.0, 10.0] {
            p.temperature = t;
            let d = derive(&p).unwrap();
            let gap = (d.coth_factor - (2.0 * d.n_thermal + 1.0)).abs() / d.coth_factor;
            assert!(gap <= last.max(1e-15));
            last = gap;
        }
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let mut p = SystemParams::reference();
        p.mass = 0.0;
        assert!(matches!(
            derive(&p),
            Err(Error::InvalidParameter { name: "mass", .. })
        ));
        let mut p = SystemParams::reference();
        p.kappa = -1.0;
        assert!(derive(&p).is_err());
        let mut p = SystemParams::reference();
        p.temperature = -0.1;
        assert!(derive(&p).is_err());
    }

    #[test]
    fn reference_set_is_markovian() {
        assert!(SystemParams::reference().markov_noise_valid());
        let mut p = SystemParams::reference();
        p.gamma_m = p.omega_m / 50.0;
        assert!(!p.markov_noise_valid());
    }

    #[test]
    fn modulation_constraints() {
        let w = TAU * 2e6;
        assert!(ModulationSpec::mechanical(1.0, w).validate().is_err());
        assert!(ModulationSpec::mechanical(0.2, w).validate().is_ok());
        let mut m = ModulationSpec::combined(0.3, 0.9, w, 0.0);
        m.omega2 = 1.5 * w;
        assert!(m.validate().is_err());
        let m = ModulationSpec::combined(0.3, 0.9, w, -0.5 * PI);
        assert!((m.phi - 1.5 * PI).abs() < 1e-12);
    }
}
