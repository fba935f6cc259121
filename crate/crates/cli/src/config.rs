use std::path::{Path, PathBuf};

use serde::Deserialize;

use fbs_core::hamiltonians::{SystemConfig, SystemSpec};

use crate::error::CliError;

/// Coupling used when no system is given: 2π × 15 kHz.
pub const DEFAULT_G: f64 = 2.0 * std::f64::consts::PI * 15e3;

/// Top-level run file.
///
/// ```toml
/// seed = 7
///
/// [system]
/// n_pairs = 3
/// g_rad_per_s = 94247.78
///
/// [protocol]
/// preset = "w-standard"
/// alpha = 2424.0
///
/// [loss]
/// gamma_over_g = 1800.0
///
/// [output]
/// dir = "out"
/// formats = ["csv", "svg"]
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub system: Option<SystemConfig>,
    /// Path to a separate system file, relative to the run file.
    #[serde(default)]
    pub system_file: Option<PathBuf>,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub loss: Option<LossConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    /// One of w-standard, w-perfect, w-lasers-on, qft, herald, pi-pulse.
    pub preset: Option<String>,
    /// Explicit schedule file; excludes `preset`.
    pub schedule_file: Option<PathBuf>,
    /// Target for explicit schedules: w-standard, w-perfect or phonon.
    pub target: Option<String>,
    pub n: Option<usize>,
    /// Per-mode drive amplitude.
    pub alpha: Option<f64>,
    /// Collective rate `sqrt(eta)`; takes precedence over `alpha`.
    pub alpha_max: Option<f64>,
    /// heralded or injected.
    pub start: Option<String>,
    pub inject_pair: Option<usize>,
    /// Lasers-on branch: standard_plus, standard_minus, perfect_plus, perfect_minus.
    pub variant: Option<String>,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub r_i: Option<f64>,
    pub r_j: Option<f64>,
    pub phi_i: Option<f64>,
    pub phi_j: Option<f64>,
    /// Fock amplitudes of the translated state.
    pub input_re: Option<Vec<f64>>,
    pub input_im: Option<Vec<f64>>,
    pub xi_r: Option<f64>,
    pub xi_phi: Option<f64>,
    pub cutoff: Option<u32>,
    /// Trace resolution.
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub gamma_over_g: Option<f64>,
    pub dt: Option<f64>,
    /// rk4 (default) or adaptive.
    pub method: Option<String>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "svg".into()]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(f) = &cfg.system_file {
            if cfg.system.is_some() {
                return Err(CliError::Config("system and system_file are mutually exclusive".into()));
            }
            let sys = base.join(f);
            let text = std::fs::read_to_string(&sys).map_err(|e| CliError::Config(format!("system_file {}: {e}", sys.display())))?;
            cfg.system = Some(SystemConfig::from_toml_str(&text).map_err(|e| CliError::Config(format!("system_file: {e}")))?);
        }
        if let Some(s) = &cfg.protocol.schedule_file {
            cfg.protocol.schedule_file = Some(base.join(s));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.protocol.preset.is_some() && self.protocol.schedule_file.is_some() {
            return Err(CliError::Config("protocol.preset and protocol.schedule_file are mutually exclusive".into()));
        }
        for f in &self.output.formats {
            if f != "csv" && f != "svg" {
                return Err(CliError::Config(format!("output.formats: unknown format {f:?}")));
            }
        }
        Ok(())
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }

    /// System from the config, or the default coupling with no loss.
    pub fn system_spec(&self, n_pairs: usize) -> Result<SystemSpec, CliError> {
        match &self.system {
            Some(s) => s.system_spec().map_err(|e| CliError::Config(format!("system: {e}"))),
            None => SystemSpec::new(n_pairs, DEFAULT_G, 0.0).map_err(CliError::from),
        }
    }

    /// Loss from `[loss]`, falling back to the system's `gamma/g`.
    pub fn gamma_over_g(&self) -> Result<f64, CliError> {
        if let Some(g) = self.loss.as_ref().and_then(|l| l.gamma_over_g) {
            return Ok(g);
        }
        match &self.system {
            Some(s) => Ok(s.gamma_rad_per_s / s.g_rad_per_s),
            None => Ok(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let text = r#"
seed = 3
[system]
n_pairs = 3
g_rad_per_s = 94247.78
gamma_rad_per_s = 1.0e7
[protocol]
preset = "w-standard"
alpha = 2424.0
[output]
dir = "x"
formats = ["csv"]
"#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert!(cfg.wants("csv") && !cfg.wants("svg"));
        assert!((cfg.gamma_over_g().unwrap() - 1.0e7 / 94247.78).abs() < 1e-9);
        assert_eq!(cfg.protocol.alpha, Some(2424.0));
    }

    #[test]
    fn rejects_unknown_keys_and_conflicts() {
        assert!(toml::from_str::<RunConfig>("[protocol]\nalhpa = 1.0\n").is_err());
        let cfg: RunConfig = toml::from_str("[protocol]\npreset = \"qft\"\nschedule_file = \"s.toml\"\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig = toml::from_str("[output]\nformats = [\"png\"]\n").unwrap();
        assert!(cfg.validate().is_err());
    }
}
