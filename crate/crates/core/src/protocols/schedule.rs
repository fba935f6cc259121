use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::dynamics::{evolve_exact, lindblad_evolve, wei_norman_evolve, Integrator, LindbladConfig};
use crate::error::{Error, Result};
use crate::fockspace::{Basis, DensityOp, Ket, Pattern, QuantumState, SparseOp};
use crate::hamiltonians::{build_classical_pump_hamiltonian, Drive, PumpLayout};

/// Upper bound on pump/Stokes pairs in a schedule; far beyond any basis that fits in memory.
pub const MAX_PAIRS: usize = 4096;

/// State of the pump modes and phonon before the first segment.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Vacuum,
    /// One phonon, optical modes empty (post-herald state).
    Phonon,
    /// One photon injected into a pump mode.
    Photon { mode: usize },
    /// `sum_k c_k |k>` in one pump mode; `amplitudes[k] = c_k`, normalized on use.
    Superposition { mode: usize, amplitudes: Vec<C64> },
}

impl InitialState {
    /// Largest number of quanta the state carries.
    pub fn excitations(&self) -> u32 {
        match self {
            InitialState::Vacuum | InitialState::Phonon | InitialState::Photon { .. } => 1,
            InitialState::Superposition { amplitudes, .. } => (amplitudes.len().saturating_sub(1) as u32).max(1),
        }
    }

    pub fn ket(&self, basis: &Arc<Basis>) -> Result<Ket> {
        let modes = basis.mode_count();
        let check = |mode: usize| {
            if mode + 1 < modes {
                Ok(())
            } else {
                Err(Error::InvalidMode {
                    mode,
                    mode_count: modes - 1,
                })
            }
        };
        let mut occ = vec![0u32; modes];
        match self {
            InitialState::Vacuum => Ket::basis_state(basis, &occ),
            InitialState::Phonon => {
                occ[modes - 1] = 1;
                Ket::basis_state(basis, &occ)
            }
            InitialState::Photon { mode } => {
                check(*mode)?;
                occ[*mode] = 1;
                Ket::basis_state(basis, &occ)
            }
            InitialState::Superposition { mode, amplitudes } => {
                check(*mode)?;
                let mut ket = Ket::zeros(basis);
                for (k, &c) in amplitudes.iter().enumerate() {
                    occ[*mode] = k as u32;
                    if !basis.contains(&occ) {
                        return Err(Error::Truncation(format!(
                            "Fock level {k} of the input does not fit the basis cutoffs {:?}",
                            basis.cutoffs()
                        )));
                    }
                    ket.set_amplitude(&occ, c)?;
                }
                ket.normalize()
                    .map_err(|_| Error::Config("initial superposition has zero norm".into()))?;
                Ok(ket)
            }
        }
    }
}

/// Constant drive held for `duration_gt`. A drive with every amplitude zero
/// is a delay: identity without loss, pure damping with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub drive: Drive,
    pub duration_gt: f64,
}

/// Projective check after a segment: keep only the branch where `mode` holds
/// `outcome` quanta, renormalize, and multiply the success probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub after_segment: usize,
    pub mode: usize,
    pub outcome: u32,
}

/// Two-mode squeezer used to herald the initial phonon. Reported alongside a
/// schedule; the schedule itself starts from the ideal heralded state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldSpec {
    pub xi: C64,
    pub cutoff: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub n_pairs: usize,
    pub segments: Vec<Segment>,
    pub initial_state: InitialState,
    pub measurements: Vec<Measurement>,
    pub herald: Option<HeraldSpec>,
}

impl PulseSchedule {
    pub fn new(n_pairs: usize, initial_state: InitialState) -> PulseSchedule {
        PulseSchedule {
            n_pairs,
            segments: Vec::new(),
            initial_state,
            measurements: Vec::new(),
            herald: None,
        }
    }

    pub fn segment(mut self, drive: Drive, duration_gt: f64) -> PulseSchedule {
        self.segments.push(Segment { drive, duration_gt });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 || self.n_pairs > MAX_PAIRS {
            return Err(Error::Config(format!(
                "n_pairs must be between 1 and {MAX_PAIRS}, got {}",
                self.n_pairs
            )));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.drive.len() != self.n_pairs {
                return Err(Error::Config(format!(
                    "segment {i}: drive has {} amplitudes for n_pairs = {}",
                    s.drive.len(),
                    self.n_pairs
                )));
            }
            if !(s.duration_gt > 0.0 && s.duration_gt.is_finite()) {
                return Err(Error::Config(format!(
                    "segment {i}: duration_gt must be positive, got {}",
                    s.duration_gt
                )));
            }
        }
        let modes = PumpLayout { n_pairs: self.n_pairs }.mode_count();
        match self.initial_state {
            InitialState::Photon { mode } if mode >= self.n_pairs => {
                return Err(Error::Config(format!(
                    "initial_state.mode = {mode} is not a pump mode (n_pairs = {})",
                    self.n_pairs
                )));
            }
            InitialState::Superposition { mode, .. } if mode >= modes => {
                return Err(Error::Config(format!("initial_state.mode = {mode} but there are {modes} modes")));
            }
            _ => {}
        }
        for m in &self.measurements {
            if m.after_segment >= self.segments.len() {
                return Err(Error::Config(format!(
                    "measurement after segment {} but the schedule has {} segments",
                    m.after_segment,
                    self.segments.len()
                )));
            }
            if m.mode >= modes {
                return Err(Error::Config(format!(
                    "measurement on mode {} but there are {modes} modes",
                    m.mode
                )));
            }
        }
        if let Some(h) = &self.herald {
            if h.cutoff < 2 {
                return Err(Error::Config("herald.cutoff must be at least 2".into()));
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_gt).sum()
    }

    /// Largest collective Rabi rate over all segments.
    pub fn max_rabi_rate(&self) -> f64 {
        self.segments.iter().map(|s| s.drive.rabi_rate()).fold(0.0, f64::max)
    }

    /// Pump modes followed by the phonon, capped at the initial excitation.
    pub fn basis(&self) -> Result<Arc<Basis>> {
        Basis::excitation_sector(self.n_pairs, self.initial_state.excitations())
    }
}

/// Amplitude damping on every pump mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    pub gamma_over_g: f64,
    /// Step in `gt`; `None` picks [`LindbladConfig::default_dt`] from the
    /// schedule's fastest rate.
    pub dt: Option<f64>,
    pub method: Integrator,
}

impl LossModel {
    pub fn new(gamma_over_g: f64) -> LossModel {
        LossModel {
            gamma_over_g,
            dt: None,
            method: Integrator::Rk4,
        }
    }

    pub fn config(&self, schedule: &PulseSchedule) -> LindbladConfig {
        let dt = self
            .dt
            .unwrap_or_else(|| LindbladConfig::default_dt(self.gamma_over_g, schedule.max_rabi_rate()));
        LindbladConfig::new(self.gamma_over_g, (0..schedule.n_pairs).collect(), dt).with_method(self.method)
    }
}

/// How segments are propagated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Engine {
    /// Dense/Krylov exponential of the strong-drive Hamiltonian.
    #[default]
    Exact,
    /// Factored propagator; fails when a segment ends on a coefficient singularity.
    WeiNorman,
    /// Master equation with pump loss.
    Lindblad(LossModel),
}

/// Pure or mixed state produced by a schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(Ket),
    Mixed(DensityOp),
}

impl State {
    pub fn basis(&self) -> &Arc<Basis> {
        match self {
            State::Pure(k) => k.basis(),
            State::Mixed(r) => r.basis(),
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        match self {
            State::Pure(k) => k.populations(),
            State::Mixed(r) => r.populations(),
        }
    }

    pub fn probability(&self, pattern: &Pattern) -> f64 {
        match self {
            State::Pure(k) => pattern.probability(k),
            State::Mixed(r) => pattern.probability(r),
        }
    }

    pub fn fidelity(&self, target: &Ket) -> Result<f64> {
        match self {
            State::Pure(k) => k.overlap_with(target),
            State::Mixed(r) => r.overlap_with(target),
        }
    }

    /// `arg <target|psi>` for pure states.
    pub fn global_phase(&self, target: &Ket) -> Result<Option<f64>> {
        match self {
            State::Pure(k) => Ok(Some(target.inner(k)?.arg())),
            State::Mixed(_) => Ok(None),
        }
    }

    pub fn as_pure(&self) -> Option<&Ket> {
        match self {
            State::Pure(k) => Some(k),
            State::Mixed(_) => None,
        }
    }

    /// Total probability (1 for pure states after conditioning, the trace otherwise).
    pub fn norm(&self) -> f64 {
        match self {
            State::Pure(k) => k.norm().powi(2),
            State::Mixed(r) => r.trace().re,
        }
    }

    fn project(&mut self, m: &Measurement) -> Result<f64> {
        let keep = |occ: &[u32]| occ[m.mode] == m.outcome;
        match self {
            State::Pure(k) => {
                let basis = k.basis().clone();
                let mut p = 0.0;
                for (i, a) in k.amplitudes_mut().iter_mut().enumerate() {
                    if keep(basis.occupation(i)) {
                        p += a.norm_sqr();
                    } else {
                        *a = C64::new(0.0, 0.0);
                    }
                }
                if p <= 0.0 {
                    return Err(Error::ZeroHeraldProbability);
                }
                k.normalize()?;
                Ok(p)
            }
            State::Mixed(r) => {
                let basis = r.basis().clone();
                let mut m_ = r.matrix().clone();
                let n = basis.dim();
                for i in 0..n {
                    for j in 0..n {
                        if !(keep(basis.occupation(i)) && keep(basis.occupation(j))) {
                            m_[(i, j)] = C64::new(0.0, 0.0);
                        }
                    }
                }
                let p = m_.trace().re;
                if p <= 0.0 {
                    return Err(Error::ZeroHeraldProbability);
                }
                *r = DensityOp::new(&basis, m_ / C64::new(p, 0.0))?;
                Ok(p)
            }
        }
    }
}

/// Final state of a schedule and the probability that every measurement in
/// it returned its requested outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub state: State,
    pub success_probability: f64,
}

struct Runner<'a> {
    schedule: &'a PulseSchedule,
    engine: Engine,
    basis: Arc<Basis>,
    lindblad: Option<LindbladConfig>,
    hamiltonians: Vec<Option<SparseOp>>,
}

impl<'a> Runner<'a> {
    fn new(schedule: &'a PulseSchedule, engine: Engine) -> Result<Runner<'a>> {
        schedule.validate()?;
        let basis = schedule.basis()?;
        let lindblad = match engine {
            Engine::Lindblad(loss) => {
                let cfg = loss.config(schedule);
                cfg.validate(&basis)?;
                Some(cfg)
            }
            _ => None,
        };
        let hamiltonians = schedule
            .segments
            .iter()
            .map(|s| {
                if s.drive.eta() > 0.0 && !matches!(engine, Engine::WeiNorman) {
                    build_classical_pump_hamiltonian(&s.drive, &basis).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Runner {
            schedule,
            engine,
            basis,
            lindblad,
            hamiltonians,
        })
    }

    fn initial(&self) -> Result<State> {
        let ket = self.schedule.initial_state.ket(&self.basis)?;
        Ok(match self.engine {
            Engine::Lindblad(_) => State::Mixed(ket.to_density()),
            _ => State::Pure(ket),
        })
    }

    fn advance(&self, state: &State, segment: usize, gt: f64) -> Result<State> {
        if gt == 0.0 {
            return Ok(state.clone());
        }
        let seg = &self.schedule.segments[segment];
        match (state, self.engine) {
            (State::Pure(k), Engine::Exact) => match &self.hamiltonians[segment] {
                Some(h) => evolve_exact(h, k, gt).map(State::Pure),
                None => Ok(state.clone()),
            },
            (State::Pure(k), Engine::WeiNorman) => {
                if seg.drive.eta() > 0.0 {
                    wei_norman_evolve(&seg.drive, k, gt).map(State::Pure)
                } else {
                    Ok(state.clone())
                }
            }
            (State::Mixed(r), Engine::Lindblad(_)) => {
                let cfg = self.lindblad.as_ref().expect("lossy engine has a config");
                let zero;
                let h = match &self.hamiltonians[segment] {
                    Some(h) => h,
                    None => {
                        zero = SparseOp::zero(&self.basis);
                        &zero
                    }
                };
                lindblad_evolve(h, r, cfg, gt).map(State::Mixed)
            }
            _ => unreachable!("state kind follows the engine"),
        }
    }

    fn after_segment(&self, state: &mut State, segment: usize, success: &mut f64) -> Result<()> {
        for m in self.schedule.measurements.iter().filter(|m| m.after_segment == segment) {
            *success *= state.project(m)?;
        }
        Ok(())
    }
}

/// Propagate a schedule to its end.
pub fn execute(schedule: &PulseSchedule, engine: Engine) -> Result<Execution> {
    let runner = Runner::new(schedule, engine)?;
    let mut state = runner.initial()?;
    let mut success = 1.0;
    for (i, seg) in schedule.segments.iter().enumerate() {
        state = runner.advance(&state, i, seg.duration_gt)?;
        runner.after_segment(&mut state, i, &mut success)?;
    }
    Ok(Execution {
        state,
        success_probability: success,
    })
}

/// States at the requested times (in `gt`, ascending, within the schedule).
///
/// Measurements are applied when a sample lies past their segment's end.
/// Propagation is sequential, so lossy runs integrate each interval once.
pub fn sample(schedule: &PulseSchedule, engine: Engine, times: &[f64]) -> Result<Vec<State>> {
    let runner = Runner::new(schedule, engine)?;
    let total = schedule.total_duration();
    if let Some(w) = times.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::Config(format!("sample times must ascend ({} after {})", w[1], w[0])));
    }
    if let Some(&t) = times.iter().find(|&&t| !(0.0..=total * (1.0 + 1e-12)).contains(&t)) {
        return Err(Error::Config(format!("sample time {t} outside the schedule [0, {total}]")));
    }
    let mut state = runner.initial()?;
    let mut success = 1.0;
    let mut out = Vec::with_capacity(times.len());
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut now = 0.0;
    for &t in times {
        // Cross every segment boundary before t.
        while seg < schedule.segments.len() && seg_start + schedule.segments[seg].duration_gt <= t {
            let end = seg_start + schedule.segments[seg].duration_gt;
            state = runner.advance(&state, seg, end - now)?;
            runner.after_segment(&mut state, seg, &mut success)?;
            now = end;
            seg_start = end;
            seg += 1;
        }
        if seg < schedule.segments.len() && t > now {
            state = runner.advance(&state, seg, t - now)?;
            now = t;
        }
        out.push(state.clone());
    }
    Ok(out)
}
