//! Physical parameters and Hamiltonian builders.
//!
//! Every operator returned here is expressed in units of `ħg`, so evolution
//! runs in the dimensionless time `gt`. The physical coupling in
//! [`SystemSpec`] is only used to convert durations to seconds.

mod builders;
mod config;

pub use builders::{
    beamsplitter_mu, build_beamsplitter_generator, build_classical_pump_hamiltonian, build_ladder_hamiltonian,
    build_squeezer_generator, build_truncated_hamiltonian, collective_lowering, FullLayout, PumpLayout,
};
pub use config::{DriveConfig, PowerConfig, SystemConfig};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Physical parameters of the pump/Stokes/phonon system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// Number of active pump/Stokes pairs.
    pub n_pairs: usize,
    /// Optomechanical coupling, rad/s.
    pub g: f64,
    /// Optical loss rate on the pump modes, rad/s.
    pub gamma: f64,
    /// Phonon frequency, rad/s. Zero when not specified.
    pub omega_phonon: f64,
    /// Pump mode frequencies, rad/s. Empty when not specified.
    pub omega_pump: Vec<f64>,
    /// Stokes mode frequencies, rad/s. Empty when not specified.
    pub omega_stokes: Vec<f64>,
    /// Relative tolerance on `omega_p - omega_s = Omega`.
    pub phase_tolerance: f64,
}

impl SystemSpec {
    pub fn new(n_pairs: usize, g: f64, gamma: f64) -> Result<SystemSpec> {
        let spec = SystemSpec {
            n_pairs,
            g,
            gamma,
            omega_phonon: 0.0,
            omega_pump: Vec::new(),
            omega_stokes: Vec::new(),
            phase_tolerance: 1e-9,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_frequencies(mut self, omega_phonon: f64, omega_pump: Vec<f64>, omega_stokes: Vec<f64>) -> Result<Self> {
        self.omega_phonon = omega_phonon;
        self.omega_pump = omega_pump;
        self.omega_stokes = omega_stokes;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::Config("n_pairs must be at least 1".into()));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::Config(format!("g_rad_per_s must be positive, got {}", self.g)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma_rad_per_s must be non-negative, got {}",
                self.gamma
            )));
        }
        if self.omega_pump.len() != self.omega_stokes.len() {
            return Err(Error::Config(
                "omega_pump_rad_per_s and omega_stokes_rad_per_s must have equal length".into(),
            ));
        }
        if !self.omega_pump.is_empty() && self.omega_pump.len() != self.n_pairs {
            return Err(Error::Config(format!(
                "{} mode frequencies given for {} pairs",
                self.omega_pump.len(),
                self.n_pairs
            )));
        }
        for (pair, (wp, ws)) in self.omega_pump.iter().zip(&self.omega_stokes).enumerate() {
            let mismatch = wp - ws - self.omega_phonon;
            if mismatch.abs() > self.phase_tolerance * wp.abs().max(self.omega_phonon.abs()) {
                return Err(Error::PhaseMismatch { pair, mismatch });
            }
        }
        Ok(())
    }

    pub fn has_frequencies(&self) -> bool {
        !self.omega_pump.is_empty()
    }

    pub fn gamma_over_g(&self) -> f64 {
        self.gamma / self.g
    }

    /// Converts a dimensionless duration `gt` to seconds.
    pub fn seconds(&self, gt: f64) -> f64 {
        gt / self.g
    }
}

/// Classical Stokes drive amplitudes `alpha_n = r_n e^{i phi_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Drive {
    amplitudes: Vec<C64>,
}

impl Drive {
    pub fn new(amplitudes: Vec<C64>) -> Drive {
        Drive { amplitudes }
    }

    pub fn from_polar(r: &[f64], phi: &[f64]) -> Result<Drive> {
        if r.len() != phi.len() {
            return Err(Error::InvalidDrive(format!(
                "{} magnitudes but {} phases",
                r.len(),
                phi.len()
            )));
        }
        if let Some(bad) = r.iter().chain(phi).find(|v| !v.is_finite()) {
            return Err(Error::InvalidDrive(format!("non-finite drive parameter {bad}")));
        }
        if let Some(bad) = r.iter().find(|&&v| v < 0.0) {
            return Err(Error::InvalidDrive(format!("negative magnitude {bad}")));
        }
        Ok(Drive {
            amplitudes: r.iter().zip(phi).map(|(&r, &p)| C64::from_polar(r, p)).collect(),
        })
    }

    /// The same real amplitude on all `n_pairs` Stokes modes.
    pub fn uniform(n_pairs: usize, r: f64) -> Drive {
        Drive {
            amplitudes: vec![C64::new(r, 0.0); n_pairs],
        }
    }

    /// Only `pair` driven.
    pub fn single(n_pairs: usize, pair: usize, r: f64, phi: f64) -> Result<Drive> {
        if pair >= n_pairs {
            return Err(Error::InvalidMode {
                mode: pair,
                mode_count: n_pairs,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); n_pairs];
        amplitudes[pair] = C64::from_polar(r, phi);
        Ok(Drive { amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.arg()).collect()
    }

    /// `eta = sum r_n^2`.
    pub fn eta(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Collective Rabi rate `sqrt(eta)` in units of g.
    pub fn rabi_rate(&self) -> f64 {
        self.eta().sqrt()
    }

    /// `eta`, or an error when the drive is off.
    pub fn require_active(&self) -> Result<f64> {
        let eta = self.eta();
        if eta > 0.0 && eta.is_finite() {
            Ok(eta)
        } else {
            Err(Error::InvalidDrive(format!("drive must be active (eta = {eta})")))
        }
    }

    /// Extends with undriven pairs up to `n_pairs`.
    pub fn padded(&self, n_pairs: usize) -> Drive {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(n_pairs.max(amplitudes.len()), C64::new(0.0, 0.0));
        Drive { amplitudes }
    }
}

/// Conversion between the maximum drive amplitude and circulating power,
/// `P = ħ ω v_g α_max² / L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudget {
    pub alpha_max: Option<f64>,
    /// Optical angular frequency, rad/s.
    pub omega_optical: f64,
    /// Group velocity, m/s.
    pub v_g: f64,
    /// Resonator length, m.
    pub length: f64,
    /// Circulating power, W.
    pub power: Option<f64>,
}

impl PowerBudget {
    /// Telecom-band defaults: λ = 1550 nm and a group index of 3.39. With
    /// L = 4 mm these put 50 mW at α_max ≈ 4200; a silica group velocity of
    /// 2.0e8 m/s would give α_max ≈ 2790 instead.
    pub fn telecom(length: f64) -> PowerBudget {
        PowerBudget {
            alpha_max: None,
            omega_optical: 2.0 * std::f64::consts::PI * 299_792_458.0 / 1550e-9,
            v_g: 299_792_458.0 / 3.39,
            length,
            power: None,
        }
    }

    fn energy_rate(&self) -> Result<f64> {
        for (name, v) in [
            ("omega_optical", self.omega_optical),
            ("v_g", self.v_g),
            ("length", self.length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("power.{name} must be positive, got {v}")));
            }
        }
        Ok(HBAR * self.omega_optical * self.v_g / self.length)
    }

    pub fn is_consistent(&self) -> bool {
        match (self.alpha_max, self.power) {
            (Some(a), Some(p)) => power_from_alpha(self)
                .map(|q| ((q - p) / p).abs() <= 1e-12)
                .unwrap_or(false)
                && a > 0.0,
            _ => true,
        }
    }
}

pub fn alpha_from_power(budget: &PowerBudget) -> Result<f64> {
    let power = budget
        .power
        .ok_or_else(|| Error::Config("power.power_w is not set".into()))?;
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Config(format!("power must be positive, got {power}")));
    }
    Ok((power / budget.energy_rate()?).sqrt())
}

pub fn power_from_alpha(budget: &PowerBudget) -> Result<f64> {
    let alpha = budget
        .alpha_max
        .ok_or_else(|| Error::Config("power.alpha_max is not set".into()))?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("alpha_max must be positive, got {alpha}")));
    }
    Ok(budget.energy_rate()? * alpha * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(SystemSpec::new(3, 2.0 * std::f64::consts::PI * 15e3, 0.0).is_ok());
        assert!(SystemSpec::new(0, 1.0, 0.0).is_err());
        assert!(SystemSpec::new(1, 0.0, 0.0).is_err());
        assert!(SystemSpec::new(1, 1.0, -1.0).is_err());
        let base = SystemSpec::new(2, 1.0, 0.0).unwrap();
        assert!(base.clone().with_frequencies(10.0, vec![110.0, 140.0], vec![100.0, 130.0]).is_ok());
        let err = base.with_frequencies(10.0, vec![110.0, 140.0], vec![100.0, 129.0]).unwrap_err();
        assert!(matches!(err, Error::PhaseMismatch { pair: 1, .. }));
    }

    #[test]
    fn drive_eta_and_validation() {
        let d = Drive::from_polar(&[3.0, 4.0], &[0.1, -2.0]).unwrap();
        assert!((d.eta() - 25.0).abs() < 1e-12);
        assert!((d.rabi_rate() - 5.0).abs() < 1e-12);
        assert!(Drive::from_polar(&[1.0], &[]).is_err());
        assert!(Drive::from_polar(&[-1.0], &[0.0]).is_err());
        assert!(Drive::uniform(3, 0.0).require_active().is_err());
        assert!(Drive::single(2, 2, 1.0, 0.0).is_err());
    }

    #[test]
    fn power_round_trip_and_scaling() {
        let mut b = PowerBudget::telecom(4e-3);
        b.alpha_max = Some(4200.0);
        let p = power_from_alpha(&b).unwrap();
        b.power = Some(p);
        let a = alpha_from_power(&b).unwrap();
        assert!(((a - 4200.0) / 4200.0).abs() < 1e-12);
        assert!(b.is_consistent());
        b.alpha_max = Some(8400.0);
        assert!((power_from_alpha(&b).unwrap() / p - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fifty_milliwatts_in_four_millimetres() {
        let mut b = PowerBudget::telecom(4e-3);
        b.power = Some(0.05);
        let a = alpha_from_power(&b).unwrap();
        assert!((a - 4200.0).abs() / 4200.0 < 0.01, "alpha_max = {a}");
        // A silica-like group velocity lands within a factor of two.
        b.v_g = 2.0e8;
        let a_silica = alpha_from_power(&b).unwrap();
        assert!(a_silica > 2100.0 && a_silica < 4200.0, "alpha_max = {a_silica}");
    }

    #[test]
    fn nonpositive_inputs() {
        let mut b = PowerBudget::telecom(4e-3);
        b.power = Some(-1.0);
        assert!(alpha_from_power(&b).is_err());
        b.power = Some(1.0);
        b.length = 0.0;
        assert!(alpha_from_power(&b).is_err());
        assert!(power_from_alpha(&PowerBudget::telecom(1.0)).is_err());
    }
}
