use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fockspace::text::format_float;
use crate::fockspace::Pattern;
use crate::protocols::{sample, Engine, PulseSchedule};

/// Label of the derived series summing every single-photon pump probability.
pub const W_LABEL: &str = "W";

/// Probabilities slightly outside [0, 1] from rounding are tolerated up to this.
pub const PROBABILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
    /// Drawn dashed in plots (derived sums).
    pub dashed: bool,
}

/// Sampled curves sharing one abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Name of the abscissa; `gt` for time traces, the swept parameter otherwise.
    pub x_label: String,
    pub times: Vec<f64>,
    pub series: Vec<Series>,
    pub metadata: BTreeMap<String, String>,
    /// Abscissa values worth marking in plots (e.g. W-state times).
    pub markers: Vec<f64>,
}

impl Trace {
    pub fn new(x_label: &str, times: Vec<f64>) -> Trace {
        Trace {
            x_label: x_label.to_string(),
            times,
            series: Vec::new(),
            metadata: BTreeMap::new(),
            markers: Vec::new(),
        }
    }

    pub fn push_series(&mut self, label: &str, values: Vec<f64>, dashed: bool) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch {
                expected: self.times.len(),
                got: values.len(),
            });
        }
        if self.series.iter().any(|s| s.label == label) {
            return Err(Error::Config(format!("duplicate series label {label:?}")));
        }
        self.series.push(Series {
            label: label.to_string(),
            values,
            dashed,
        });
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.series.iter().find(|s| s.label == label).map(|s| s.values.as_slice())
    }

    /// Checks the shared length and, for time traces, the probability range.
    pub fn validate(&self) -> Result<()> {
        for s in &self.series {
            if s.values.len() != self.times.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.times.len(),
                    got: s.values.len(),
                });
            }
            if self.x_label == "gt" {
                if let Some(v) = s
                    .values
                    .iter()
                    .find(|v| !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(*v))
                {
                    return Err(Error::Config(format!("series {:?} has probability {v} outside [0, 1]", s.label)));
                }
            }
        }
        Ok(())
    }

    /// Header `x,label1,label2,...` then one row per sample.
    pub fn to_csv_string(&self) -> Result<String> {
        if self.series.is_empty() {
            return Err(Error::NoSeries);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| {
            w.write_record(&rec).map_err(|e| Error::Config(e.to_string()))
        };
        let mut header = vec![self.x_label.clone()];
        header.extend(self.series.iter().map(|s| s.label.clone()));
        write(&mut w, header)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![format_float(*t)];
            row.extend(self.series.iter().map(|s| format_float(s.values[i])));
            write(&mut w, row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Inverse of [`Trace::to_csv_string`]. The derived `W` column is marked dashed.
    pub fn from_csv_str(text: &str) -> Result<Trace> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = r
            .headers()
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
            .clone();
        if header.len() < 2 {
            return Err(Error::Parse {
                line: 1,
                msg: "header needs an abscissa and at least one series".into(),
            });
        }
        let mut trace = Trace::new(&header[0], Vec::new());
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            if rec.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", header.len(), rec.len()),
                });
            }
            let parse = |s: &str| match s.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(Error::Parse {
                    line,
                    msg: format!("non-finite number {s:?}"),
                }),
                Err(e) => Err(Error::Parse {
                    line,
                    msg: format!("{s:?}: {e}"),
                }),
            };
            trace.times.push(parse(&rec[0])?);
            for (c, field) in columns.iter_mut().zip(rec.iter().skip(1)) {
                c.push(parse(field)?);
            }
        }
        for (label, values) in header.iter().skip(1).zip(columns) {
            trace
                .push_series(label, values, label == W_LABEL)
                .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        }
        Ok(trace)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomically(path, &self.to_csv_string()?)
    }
}

/// Write to `<path>.partial` and rename once complete, so an interrupted run
/// never leaves a truncated file under the final name.
pub fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let io = |p: &Path| {
        let p = p.display().to_string();
        move |source| Error::Io { path: p, source }
    };
    let mut partial = path.as_os_str().to_owned();
    partial.push(".partial");
    let partial = Path::new(&partial);
    std::fs::write(partial, contents).map_err(io(partial))?;
    std::fs::rename(partial, path).map_err(io(path))
}

/// Samples `patterns` at `samples` evenly spaced points over the schedule.
///
/// With `with_w` the dashed `W` series is added: the total probability of a
/// single photon sitting in one pump mode with everything else empty.
pub fn probability_trace(
    schedule: &PulseSchedule,
    engine: Engine,
    patterns: &[(String, Pattern)],
    samples: usize,
    with_w: bool,
) -> Result<Trace> {
    if samples < 2 {
        return Err(Error::Config(format!("samples must be at least 2, got {samples}")));
    }
    schedule.validate()?;
    let total = schedule.total_duration();
    let times: Vec<f64> = (0..samples)
        .map(|i| total * i as f64 / (samples - 1) as f64)
        .collect();
    let states = sample(schedule, engine, &times)?;
    let mut trace = Trace::new("gt", times);
    for (label, p) in patterns {
        trace.push_series(label, states.iter().map(|s| s.probability(p)).collect(), false)?;
    }
    if with_w {
        let modes = schedule.n_pairs + 1;
        let photonic: Vec<Pattern> = (0..schedule.n_pairs).map(|n| Pattern::single(modes, n)).collect();
        let w = states
            .iter()
            .map(|s| photonic.iter().map(|p| s.probability(p)).sum())
            .collect();
        trace.push_series(W_LABEL, w, true)?;
    }
    trace.metadata.insert("n_pairs".into(), schedule.n_pairs.to_string());
    trace.metadata.insert("duration_gt".into(), format_float(total));
    Ok(trace)
}

/// `P_1..P_N` and `P_ph` patterns for the single-excitation sector.
pub fn single_excitation_patterns(n_pairs: usize) -> Vec<(String, Pattern)> {
    let modes = n_pairs + 1;
    let mut out: Vec<(String, Pattern)> = (0..n_pairs)
        .map(|n| (format!("P{}", n + 1), Pattern::single(modes, n)))
        .collect();
    out.push(("P_ph".into(), Pattern::single(modes, n_pairs)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::Drive;
    use crate::protocols::InitialState;

    fn standard(n: usize, alpha: f64, duration: f64) -> PulseSchedule {
        PulseSchedule::new(n, InitialState::Phonon).segment(Drive::uniform(n, alpha), duration)
    }

    #[test]
    fn standard_trace_follows_cos_and_sin() {
        let alpha = 2424.0;
        let root = alpha * 3f64.sqrt();
        let s = standard(3, alpha, 4.0 / root);
        let t = probability_trace(&s, Engine::Exact, &single_excitation_patterns(3), 41, true).unwrap();
        let (ph, w) = (t.get("P_ph").unwrap(), t.get(W_LABEL).unwrap());
        assert_eq!((ph[0], w[0]), (1.0, 0.0));
        for (i, &gt) in t.times.iter().enumerate() {
            assert!((ph[i] - (gt * root).cos().powi(2)).abs() < 1e-9);
            assert!((w[i] - (gt * root).sin().powi(2)).abs() < 1e-9);
            let total: f64 = t.series.iter().filter(|s| !s.dashed).map(|s| s.values[i]).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        t.validate().unwrap();
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = standard(2, 1.3, 2.0);
        let t = probability_trace(&s, Engine::Exact, &single_excitation_patterns(2), 17, true).unwrap();
        let text = t.to_csv_string().unwrap();
        assert!(text.starts_with("gt,P1,P2,P_ph,W\n"));
        let back = Trace::from_csv_str(&text).unwrap();
        assert_eq!(back.times, t.times);
        for (a, b) in t.series.iter().zip(&back.series) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.dashed, b.dashed);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.values), bits(&b.values));
        }
    }

    #[test]
    fn empty_and_malformed() {
        assert!(matches!(Trace::new("gt", vec![0.0]).to_csv_string(), Err(Error::NoSeries)));
        for bad in ["gt\n0.0\n", "gt,a\n0.0,zz\n", "gt,a\n0.0,NaN\n", "gt,a\n0.0\n", "gt,a,a\n0,1,1\n"] {
            assert!(Trace::from_csv_str(bad).is_err(), "{bad}");
        }
        let s = standard(1, 1.0, 1.0);
        assert!(probability_trace(&s, Engine::Exact, &[], 1, false).is_err());
    }

    #[test]
    fn atomic_write_leaves_no_partial() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Trace::new("gt", vec![0.0, 1.0]);
        t.push_series("a", vec![0.5, 0.25], false).unwrap();
        t.write_csv(&path).unwrap();
        assert!(path.exists());
        assert!(!dir.path().join("t.csv.partial").exists());
        let missing = dir.path().join("nope").join("t.csv");
        let err = t.write_csv(&missing).unwrap_err();
        assert!(err.to_string().contains("nope"));
    }
}
