use serde::Deserialize;

use super::{Drive, PowerBudget, SystemSpec};
use crate::error::{Error, Result};

/// System description as loaded from a TOML file.
///
/// ```toml
/// n_pairs = 3
/// g_rad_per_s = 94247.78
/// gamma_rad_per_s = 1.696e8
///
/// [drive]
/// r = [2424.0, 2424.0, 2424.0]
/// phi = [0.0, 0.0, 0.0]
///
/// [power]
/// omega_optical_rad_per_s = 1.2153e15
/// group_velocity_m_per_s = 8.84e7
/// length_m = 4e-3
/// power_w = 0.05
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_pairs: usize,
    pub g_rad_per_s: f64,
    #[serde(default)]
    pub gamma_rad_per_s: f64,
    #[serde(default)]
    pub omega_phonon_rad_per_s: Option<f64>,
    #[serde(default)]
    pub omega_pump_rad_per_s: Option<Vec<f64>>,
    #[serde(default)]
    pub omega_stokes_rad_per_s: Option<Vec<f64>>,
    #[serde(default)]
    pub drive: Option<DriveConfig>,
    #[serde(default)]
    pub power: Option<PowerConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub r: Vec<f64>,
    #[serde(default)]
    pub phi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub omega_optical_rad_per_s: f64,
    pub group_velocity_m_per_s: f64,
    pub length_m: f64,
    #[serde(default)]
    pub power_w: Option<f64>,
    #[serde(default)]
    pub alpha_max: Option<f64>,
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<SystemConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let spec = SystemSpec::new(self.n_pairs, self.g_rad_per_s, self.gamma_rad_per_s)?;
        match (&self.omega_pump_rad_per_s, &self.omega_stokes_rad_per_s) {
            (None, None) => {
                let mut spec = spec;
                spec.omega_phonon = self.omega_phonon_rad_per_s.unwrap_or(0.0);
                Ok(spec)
            }
            (Some(p), Some(s)) => spec.with_frequencies(
                self.omega_phonon_rad_per_s.ok_or_else(|| {
                    Error::Config("omega_phonon_rad_per_s is required with mode frequencies".into())
                })?,
                p.clone(),
                s.clone(),
            ),
            _ => Err(Error::Config(
                "omega_pump_rad_per_s and omega_stokes_rad_per_s must be given together".into(),
            )),
        }
    }

    pub fn drive(&self) -> Result<Option<Drive>> {
        let Some(cfg) = &self.drive else {
            return Ok(None);
        };
        if cfg.r.len() != self.n_pairs {
            return Err(Error::Config(format!(
                "drive.r has {} entries for n_pairs = {}",
                cfg.r.len(),
                self.n_pairs
            )));
        }
        let phi = cfg.phi.clone().unwrap_or_else(|| vec![0.0; cfg.r.len()]);
        Drive::from_polar(&cfg.r, &phi)
            .map(Some)
            .map_err(|e| Error::Config(format!("drive: {e}")))
    }

    pub fn power_budget(&self) -> Result<Option<PowerBudget>> {
        let Some(p) = &self.power else {
            return Ok(None);
        };
        let budget = PowerBudget {
            alpha_max: p.alpha_max,
            omega_optical: p.omega_optical_rad_per_s,
            v_g: p.group_velocity_m_per_s,
            length: p.length_m,
            power: p.power_w,
        };
        if !budget.is_consistent() {
            return Err(Error::Config("power.alpha_max and power.power_w disagree".into()));
        }
        Ok(Some(budget))
    }
}
