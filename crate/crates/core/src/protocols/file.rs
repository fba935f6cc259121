use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::schedule::{HeraldSpec, InitialState, Measurement, PulseSchedule};
use crate::error::{Error, Result};
use crate::hamiltonians::Drive;

/// On-disk form of a [`PulseSchedule`].
///
/// ```toml
/// n_pairs = 2
/// initial_state = { kind = "photon", mode = 0 }
///
/// [[segment]]
/// r = [3.0, 0.0]
/// phi = [0.0, 0.0]
/// duration_gt = 0.5235987755982988
///
/// [[measurement]]
/// after_segment = 0
/// mode = 2
/// outcome = 1
///
/// [herald]
/// xi_r = 0.1
/// xi_phi = 0.0
/// cutoff = 6
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    n_pairs: usize,
    initial_state: InitialStateFile,
    #[serde(default)]
    segment: Vec<SegmentFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    measurement: Vec<MeasurementFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    herald: Option<HeraldFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum InitialStateFile {
    Vacuum,
    Phonon,
    Photon {
        mode: usize,
    },
    Superposition {
        mode: usize,
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentFile {
    r: Vec<f64>,
    #[serde(default)]
    phi: Option<Vec<f64>>,
    duration_gt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementFile {
    after_segment: usize,
    mode: usize,
    outcome: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeraldFile {
    xi_r: f64,
    #[serde(default)]
    xi_phi: f64,
    cutoff: u32,
}

impl PulseSchedule {
    /// Parse and validate a schedule file.
    pub fn from_toml_str(text: &str) -> Result<PulseSchedule> {
        let file: ScheduleFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let initial_state = match file.initial_state {
            InitialStateFile::Vacuum => InitialState::Vacuum,
            InitialStateFile::Phonon => InitialState::Phonon,
            InitialStateFile::Photon { mode } => InitialState::Photon { mode },
            InitialStateFile::Superposition { mode, re, im } => {
                if im.len() > re.len() {
                    return Err(Error::Config(format!(
                        "initial_state.im has {} entries but re only {}",
                        im.len(),
                        re.len()
                    )));
                }
                let amplitudes = re
                    .iter()
                    .enumerate()
                    .map(|(k, &x)| C64::new(x, im.get(k).copied().unwrap_or(0.0)))
                    .collect();
                InitialState::Superposition { mode, amplitudes }
            }
        };
        let mut schedule = PulseSchedule::new(file.n_pairs, initial_state);
        for (i, seg) in file.segment.into_iter().enumerate() {
            if seg.r.len() != file.n_pairs {
                return Err(Error::Config(format!(
                    "segment[{i}].r has {} entries, expected n_pairs = {}",
                    seg.r.len(),
                    file.n_pairs
                )));
            }
            let phi = seg.phi.unwrap_or_else(|| vec![0.0; seg.r.len()]);
            let drive = Drive::from_polar(&seg.r, &phi).map_err(|e| Error::Config(format!("segment[{i}]: {e}")))?;
            schedule = schedule.segment(drive, seg.duration_gt);
        }
        schedule.measurements = file
            .measurement
            .into_iter()
            .map(|m| Measurement {
                after_segment: m.after_segment,
                mode: m.mode,
                outcome: m.outcome,
            })
            .collect();
        schedule.herald = file.herald.map(|h| HeraldSpec {
            xi: C64::from_polar(h.xi_r, h.xi_phi),
            cutoff: h.cutoff,
        });
        schedule.validate()?;
        Ok(schedule)
    }

    /// Serialize with shortest round-trip float formatting.
    pub fn to_toml_string(&self) -> Result<String> {
        let initial_state = match &self.initial_state {
            InitialState::Vacuum => InitialStateFile::Vacuum,
            InitialState::Phonon => InitialStateFile::Phonon,
            InitialState::Photon { mode } => InitialStateFile::Photon { mode: *mode },
            InitialState::Superposition { mode, amplitudes } => InitialStateFile::Superposition {
                mode: *mode,
                re: amplitudes.iter().map(|c| c.re).collect(),
                im: amplitudes.iter().map(|c| c.im).collect(),
            },
        };
        let file = ScheduleFile {
            n_pairs: self.n_pairs,
            initial_state,
            segment: self
                .segments
                .iter()
                .map(|s| SegmentFile {
                    r: s.drive.magnitudes(),
                    phi: Some(s.drive.phases()),
                    duration_gt: s.duration_gt,
                })
                .collect(),
            measurement: self
                .measurements
                .iter()
                .map(|m| MeasurementFile {
                    after_segment: m.after_segment,
                    mode: m.mode,
                    outcome: m.outcome,
                })
                .collect(),
            herald: self.herald.as_ref().map(|h| HeraldFile {
                xi_r: h.xi.norm(),
                xi_phi: h.xi.arg(),
                cutoff: h.cutoff,
            }),
        };
        toml::to_string(&file).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
n_pairs = 2
initial_state = { kind = "photon", mode = 0 }

[[segment]]
r = [3.0, 0.0]
phi = [0.25, 0.0]
duration_gt = 0.5235987755982988

[[segment]]
r = [0.0, 3.0]
duration_gt = 0.5235987755982988

[[measurement]]
after_segment = 0
mode = 2
outcome = 1

[herald]
xi_r = 0.1
cutoff = 6
"#;

    #[test]
    fn parses_sample() {
        let s = PulseSchedule::from_toml_str(SAMPLE).unwrap();
        assert_eq!(s.n_pairs, 2);
        assert_eq!(s.segments.len(), 2);
        assert_eq!(s.initial_state, InitialState::Photon { mode: 0 });
        assert!((s.segments[0].drive.phases()[0] - 0.25).abs() < 1e-15);
        assert_eq!(s.measurements.len(), 1);
        assert_eq!(s.herald.as_ref().unwrap().cutoff, 6);
    }

    #[test]
    fn round_trip() {
        let s = PulseSchedule::from_toml_str(SAMPLE).unwrap();
        let back = PulseSchedule::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(back.segments.len(), s.segments.len());
        for (a, b) in s.segments.iter().zip(&back.segments) {
            assert_eq!(a.duration_gt, b.duration_gt);
            for (x, y) in a.drive.amplitudes().iter().zip(b.drive.amplitudes()) {
                assert!((x - y).norm() < 1e-15);
            }
        }
        assert_eq!(back.measurements, s.measurements);
    }

    #[test]
    fn superposition_state() {
        let text = r#"
n_pairs = 1
initial_state = { kind = "superposition", mode = 0, re = [0.6, 0.0], im = [0.0, 0.8] }
[[segment]]
r = [1.0]
duration_gt = 1.0
"#;
        let s = PulseSchedule::from_toml_str(text).unwrap();
        match s.initial_state {
            InitialState::Superposition { ref amplitudes, .. } => assert_eq!(amplitudes[1], C64::new(0.0, 0.8)),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            "n_pairs = 2\ninitial_state = { kind = \"phonon\" }\nbogus = 1\n",
            "n_pairs = 2\ninitial_state = { kind = \"laser\" }\n",
            "n_pairs = 2\ninitial_state = { kind = \"phonon\" }\n[[segment]]\nr = [1.0]\nduration_gt = 1.0\n",
            "n_pairs = 2\ninitial_state = { kind = \"phonon\" }\n[[segment]]\nr = [1.0, 1.0]\nduration_gt = -1.0\n",
            "n_pairs = 2\ninitial_state = { kind = \"photon\", mode = 5 }\n",
            "n_pairs = 1\ninitial_state = { kind = \"superposition\", mode = 0, re = [1.0], im = [0.0, 1.0] }\n",
            "not toml at all [",
        ] {
            assert!(PulseSchedule::from_toml_str(bad).is_err(), "{bad}");
        }
    }
}
