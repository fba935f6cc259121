use rayon::prelude::*;

use super::trace::Trace;
use crate::error::{Error, Result};
use crate::fockspace::Pattern;
use crate::protocols::{
    pi_pulse_swap, synthesize_w_lasers_on, synthesize_w_perfect, synthesize_w_standard, Engine, LasersOnVariant,
    LossModel, ProtocolResult, Start,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    GammaOverG,
    AlphaMax,
    NPairs,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::GammaOverG => "gamma_over_g",
            SweepParameter::AlphaMax => "alpha_max",
            SweepParameter::NPairs => "N",
        }
    }

    pub fn parse(s: &str) -> Result<SweepParameter> {
        [SweepParameter::GammaOverG, SweepParameter::AlphaMax, SweepParameter::NPairs]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep parameter {s:?}")))
    }
}

/// Protocol template; every variant is scaled so the collective rate
/// `sqrt(eta)` equals `alpha_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepProtocol {
    WStandard(Start),
    WPerfect(Start),
    LasersOn(LasersOnVariant),
    /// Single π-pulse on pair 0, fidelity to the phonon.
    PiPulse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Fidelity,
    Probability(Pattern),
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Fidelity => "fidelity",
            Metric::Probability(_) => "probability",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub protocol: SweepProtocol,
    pub n_pairs: usize,
    pub alpha_max: f64,
    pub gamma_over_g: f64,
    pub metric: Metric,
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, values: Vec<f64>, protocol: SweepProtocol) -> SweepSpec {
        SweepSpec {
            parameter,
            values,
            protocol,
            n_pairs: 3,
            alpha_max: 4200.0,
            gamma_over_g: 0.0,
            metric: Metric::Fidelity,
        }
    }

    fn point(&self, value: f64) -> Result<(usize, f64, f64)> {
        let (mut n, mut alpha_max, mut gamma) = (self.n_pairs, self.alpha_max, self.gamma_over_g);
        match self.parameter {
            SweepParameter::GammaOverG => gamma = value,
            SweepParameter::AlphaMax => alpha_max = value,
            SweepParameter::NPairs => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::Config(format!("sweep value {value} is not a pair count")));
                }
                n = value as usize;
            }
        }
        Ok((n, alpha_max, gamma))
    }

    /// Run the template at one parameter value.
    pub fn run_point(&self, value: f64) -> Result<ProtocolResult> {
        let (n, alpha_max, gamma) = self.point(value)?;
        let engine = if gamma == 0.0 {
            Engine::Exact
        } else {
            Engine::Lindblad(LossModel::new(gamma))
        };
        match self.protocol {
            SweepProtocol::WStandard(start) => {
                synthesize_w_standard(n, alpha_max / (n as f64).sqrt(), start, engine)
            }
            SweepProtocol::WPerfect(start) => {
                let alpha = alpha_max / (2.0 * (n as f64 - 1.0)).sqrt();
                synthesize_w_perfect(n, alpha, start, engine)
            }
            SweepProtocol::LasersOn(v) => {
                let alpha = alpha_max / (v.ratio(n).powi(2) + (n - 1) as f64).sqrt();
                synthesize_w_lasers_on(n, alpha, v, engine)
            }
            SweepProtocol::PiPulse => pi_pulse_swap(n, 0, alpha_max, 0.0, engine),
        }
    }

    fn metric_of(&self, result: &ProtocolResult) -> f64 {
        match &self.metric {
            Metric::Fidelity => result.fidelity,
            Metric::Probability(p) => result.final_state.probability(p),
        }
    }
}

/// Evaluate the template at every value in parallel. The result is a trace
/// whose abscissa is the swept parameter and whose single series is the metric.
pub fn fidelity_sweep(spec: &SweepSpec) -> Result<Trace> {
    if spec.values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let metrics = spec
        .values
        .par_iter()
        .map(|&v| spec.run_point(v).map(|r| spec.metric_of(&r)))
        .collect::<Result<Vec<f64>>>()?;
    let mut trace = Trace::new(spec.parameter.name(), spec.values.clone());
    trace.push_series(spec.metric.name(), metrics, false)?;
    trace.metadata.insert("protocol".into(), format!("{:?}", spec.protocol));
    trace.metadata.insert("n_pairs".into(), spec.n_pairs.to_string());
    trace.metadata.insert("alpha_max".into(), spec.alpha_max.to_string());
    trace.metadata.insert("gamma_over_g".into(), spec.gamma_over_g.to_string());
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_limit_is_unity() {
        let mut spec = SweepSpec::new(
            SweepParameter::AlphaMax,
            vec![10.0, 420.0, 4200.0],
            SweepProtocol::WStandard(Start::Heralded),
        );
        for p in [
            SweepProtocol::WStandard(Start::Heralded),
            SweepProtocol::WPerfect(Start::Injected { pair: 1 }),
            SweepProtocol::LasersOn(LasersOnVariant::PerfectMinus),
            SweepProtocol::PiPulse,
        ] {
            spec.protocol = p;
            let t = fidelity_sweep(&spec).unwrap();
            assert!(t.get("fidelity").unwrap().iter().all(|f| (f - 1.0).abs() < 1e-8), "{p:?}");
        }
    }

    #[test]
    fn fidelity_falls_with_loss() {
        let spec = SweepSpec::new(
            SweepParameter::GammaOverG,
            vec![0.0, 50.0, 100.0, 400.0],
            SweepProtocol::PiPulse,
        );
        let f = fidelity_sweep(&spec).unwrap().series[0].values.clone();
        assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{f:?}");
        assert!((f[2] - 0.98).abs() < 0.005);
    }

    #[test]
    fn csv_summary_header() {
        let mut spec = SweepSpec::new(SweepParameter::NPairs, vec![2.0, 3.0], SweepProtocol::WStandard(Start::Heralded));
        spec.metric = Metric::Probability(Pattern::Mode { mode: 0, count: 1 });
        let t = fidelity_sweep(&spec).unwrap();
        assert!(t.to_csv_string().unwrap().starts_with("N,probability\n"));
        assert!((t.series[0].values[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = SweepSpec::new(SweepParameter::NPairs, vec![], SweepProtocol::PiPulse);
        assert!(fidelity_sweep(&spec).is_err());
        let spec = SweepSpec::new(SweepParameter::NPairs, vec![2.5], SweepProtocol::PiPulse);
        assert!(fidelity_sweep(&spec).is_err());
        assert!(SweepParameter::parse("beta").is_err());
        assert_eq!(SweepParameter::parse("N").unwrap(), SweepParameter::NPairs);
    }
}
