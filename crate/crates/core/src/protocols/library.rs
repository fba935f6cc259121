use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::schedule::{execute, Engine, HeraldSpec, InitialState, PulseSchedule, State};
use crate::dynamics::exp_apply;
use crate::error::{Error, Result};
use crate::fockspace::{Basis, Ket};
use crate::hamiltonians::{build_squeezer_generator, Drive};

/// Named duration of a protocol step.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub name: String,
    pub gt: f64,
    /// Filled in by [`ProtocolResult::with_coupling`].
    pub seconds: Option<f64>,
}

impl Timing {
    pub fn new(name: &str, gt: f64) -> Timing {
        Timing {
            name: name.to_string(),
            gt,
            seconds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub name: String,
    pub schedule: Option<PulseSchedule>,
    pub final_state: State,
    pub target_state: Ket,
    pub fidelity: f64,
    /// `arg <target|final>` for pure final states.
    pub global_phase: Option<f64>,
    pub timings: Vec<Timing>,
    pub success_probability: f64,
}

impl ProtocolResult {
    fn from_schedule(name: &str, schedule: PulseSchedule, engine: Engine, target: Ket, timings: Vec<Timing>) -> Result<ProtocolResult> {
        let run = execute(&schedule, engine)?;
        let fidelity = run.state.fidelity(&target)?;
        let global_phase = run.state.global_phase(&target)?;
        Ok(ProtocolResult {
            name: name.to_string(),
            schedule: Some(schedule),
            final_state: run.state,
            target_state: target,
            fidelity,
            global_phase,
            timings,
            success_probability: run.success_probability,
        })
    }

    /// Convert every timing to seconds with the coupling `g` in rad/s.
    pub fn with_coupling(mut self, g: f64) -> ProtocolResult {
        for t in &mut self.timings {
            t.seconds = Some(t.gt / g);
        }
        self
    }

    pub fn timing(&self, name: &str) -> Option<&Timing> {
        self.timings.iter().find(|t| t.name == name)
    }

    /// Re-run the same schedule with another engine (e.g. with loss).
    pub fn rerun(&self, engine: Engine) -> Result<ProtocolResult> {
        let schedule = self
            .schedule
            .clone()
            .ok_or_else(|| Error::Config(format!("{} has no pulse schedule to re-run", self.name)))?;
        ProtocolResult::from_schedule(&self.name, schedule, engine, self.target_state.clone(), self.timings.clone())
    }
}

/// How the single excitation enters a synthesis protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    /// Heralded phonon, modelled as an ideal `|1>_ph`.
    Heralded,
    /// Photon injected into pump `pair`, swapped into the phonon by a
    /// π-pulse of the same collective rate before the super pulse.
    Injected { pair: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LasersOnVariant {
    StandardPlus,
    StandardMinus,
    PerfectPlus,
    PerfectMinus,
}

impl LasersOnVariant {
    pub const ALL: [LasersOnVariant; 4] = [
        LasersOnVariant::StandardPlus,
        LasersOnVariant::StandardMinus,
        LasersOnVariant::PerfectPlus,
        LasersOnVariant::PerfectMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LasersOnVariant::StandardPlus => "standard_plus",
            LasersOnVariant::StandardMinus => "standard_minus",
            LasersOnVariant::PerfectPlus => "perfect_plus",
            LasersOnVariant::PerfectMinus => "perfect_minus",
        }
    }

    pub fn parse(name: &str) -> Result<LasersOnVariant> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown lasers-on variant {name:?}")))
    }

    fn is_plus(self) -> bool {
        matches!(self, LasersOnVariant::StandardPlus | LasersOnVariant::PerfectPlus)
    }

    fn is_perfect(self) -> bool {
        matches!(self, LasersOnVariant::PerfectPlus | LasersOnVariant::PerfectMinus)
    }

    /// `r_1/alpha`: `(N-1)/(sqrt N ± 1)` or `sqrt((N-1)/(3 ± sqrt 8))`.
    pub fn ratio(self, n: usize) -> f64 {
        let m = (n - 1) as f64;
        let sign = if self.is_plus() { 1.0 } else { -1.0 };
        if self.is_perfect() {
            (m / (3.0 + sign * 8f64.sqrt())).sqrt()
        } else {
            m / ((n as f64).sqrt() + sign)
        }
    }
}

/// Single-excitation ket with the given amplitude on each pump mode.
pub fn pump_superposition(amplitudes: &[C64]) -> Result<Ket> {
    let n = amplitudes.len();
    let basis = Basis::single_excitation(n)?;
    let mut ket = Ket::zeros(&basis);
    let mut occ = vec![0u32; n + 1];
    for (l, &a) in amplitudes.iter().enumerate() {
        occ[l] = 1;
        ket.set_amplitude(&occ, a)?;
        occ[l] = 0;
    }
    Ok(ket)
}

/// Equal-weight W state over `n` pump modes.
pub fn w_standard_target(n: usize) -> Result<Ket> {
    pump_superposition(&vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n])
}

/// Weight `1/sqrt 2` on pump 0 and `1/sqrt(2(N-1))` on the rest.
pub fn w_perfect_target(n: usize) -> Result<Ket> {
    let mut amps = vec![C64::new(1.0 / (2.0 * (n - 1) as f64).sqrt(), 0.0); n];
    amps[0] = C64::new(0.5f64.sqrt(), 0.0);
    pump_superposition(&amps)
}

fn phonon_ket(n: usize) -> Result<Ket> {
    let basis = Basis::single_excitation(n)?;
    let mut occ = vec![0u32; n + 1];
    occ[n] = 1;
    Ket::basis_state(&basis, &occ)
}

fn require_pairs(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::Config(format!("at least {min} pairs required, got {n}")))
    } else {
        Ok(())
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDrive(format!("{name} must be positive, got {v}")))
    }
}

/// Which super-π-pulse duration to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseKind {
    /// Equal drives, `π/(2 α sqrt N)`.
    Standard,
    /// `r_1 = α sqrt(N-1)`, `π/(2 α sqrt(2(N-1)))`.
    Perfect,
    /// `π/(2 α_max)` with `α_max = sqrt(eta)`.
    AlphaMax,
}

/// State-swap time in `gt` for a super (or plain) π-pulse.
///
/// All three kinds equal `π/(2 sqrt eta)`; the standard and perfect kinds
/// additionally check that the drive has the corresponding shape.
pub fn super_pi_time(drive: &Drive, kind: PulseKind) -> Result<f64> {
    let eta = drive.require_active()?;
    let mags = drive.magnitudes();
    let n = mags.len();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    match kind {
        PulseKind::Standard => {
            if !mags.iter().all(|&r| close(r, mags[0])) {
                return Err(Error::InvalidDrive("standard super pulse needs equal magnitudes".into()));
            }
            Ok(PI / (2.0 * mags[0] * (n as f64).sqrt()))
        }
        PulseKind::Perfect => {
            require_pairs(n, 2)?;
            let alpha = mags[1];
            let shaped = mags[1..].iter().all(|&r| close(r, alpha)) && close(mags[0], alpha * ((n - 1) as f64).sqrt());
            if !shaped {
                return Err(Error::InvalidDrive(
                    "perfect super pulse needs r_1 = alpha sqrt(N-1) and equal remaining magnitudes".into(),
                ));
            }
            Ok(PI / (2.0 * alpha * (2.0 * (n - 1) as f64).sqrt()))
        }
        PulseKind::AlphaMax => Ok(PI / (2.0 * eta.sqrt())),
    }
}

/// `π/(2 g α_max)` in seconds.
pub fn tau_seconds(alpha_max: f64, g: f64) -> f64 {
    PI / (2.0 * g * alpha_max)
}

/// Duration of a π-pulse on one pair, `π/(2 r)` in `gt`.
pub fn pi_pulse_time(r: f64) -> Result<f64> {
    require_positive("r", r)?;
    Ok(PI / (2.0 * r))
}

/// Frequency-translation time `π/2 (1/r_i + 1/r_j)` in `gt`.
pub fn qft_time(r_i: f64, r_j: f64) -> Result<f64> {
    Ok(pi_pulse_time(r_i)? + pi_pulse_time(r_j)?)
}

/// Heralded phonon from a two-mode squeezer.
///
/// Applies `S(xi)` to the Stokes/phonon vacuum on a basis cut at `cutoff`,
/// keeps the single-Stokes-photon branch and returns the phonon state on a
/// one-mode basis. `xi = 0` has no heralding event and is an error.
pub fn herald_phonon(xi: C64, cutoff: u32) -> Result<ProtocolResult> {
    if cutoff < 2 {
        return Err(Error::Config(format!("herald cutoff must be at least 2, got {cutoff}")));
    }
    if xi.norm() == 0.0 {
        return Err(Error::ZeroHeraldProbability);
    }
    // Pairs beyond the cutoff carry tanh(r)^(2 cutoff - 2) of the norm.
    let tail = xi.norm().tanh().powi(2 * (cutoff as i32 - 1));
    if tail >= 1e-6 {
        return Err(Error::Truncation(format!(
            "|xi| = {} leaves {tail:.3e} probability at or beyond the cutoff {cutoff}",
            xi.norm()
        )));
    }
    let pair = Basis::new(&[cutoff, cutoff], None)?;
    let squeezed = exp_apply(&build_squeezer_generator(&pair, xi)?, &Ket::basis_state(&pair, &[0, 0])?)?;
    let phonon_basis: Arc<Basis> = Basis::new(&[cutoff], None)?;
    let mut phonon = Ket::zeros(&phonon_basis);
    for n in 0..=cutoff {
        if let Some(a) = squeezed.amplitude_of(&[1, n]) {
            phonon.set_amplitude(&[n], a)?;
        }
    }
    let p = phonon.normalize()?.powi(2);
    let target = Ket::basis_state(&phonon_basis, &[1])?;
    let state = State::Pure(phonon);
    Ok(ProtocolResult {
        name: "herald".into(),
        schedule: None,
        fidelity: state.fidelity(&target)?,
        global_phase: state.global_phase(&target)?,
        final_state: state,
        target_state: target,
        timings: Vec::new(),
        success_probability: p,
    })
}

/// Schedule for one pulse on `pair` lasting `fraction` of a π-pulse.
pub fn pi_pulse_schedule(n_pairs: usize, pair: usize, r: f64, phi: f64, fraction: f64, initial: InitialState) -> Result<PulseSchedule> {
    let t = pi_pulse_time(r)? * fraction;
    Ok(PulseSchedule::new(n_pairs, initial).segment(Drive::single(n_pairs, pair, r, phi)?, t))
}

/// π-pulse swapping a photon in pump `pair` into the phonon.
pub fn pi_pulse_swap(n_pairs: usize, pair: usize, r: f64, phi: f64, engine: Engine) -> Result<ProtocolResult> {
    let schedule = pi_pulse_schedule(n_pairs, pair, r, phi, 1.0, InitialState::Photon { mode: pair })?;
    let t = schedule.total_duration();
    ProtocolResult::from_schedule("pi-pulse", schedule, engine, phonon_ket(n_pairs)?, vec![Timing::new("t_pi", t)])
}

fn synthesis_schedule(drive: Drive, start: Start, timings: &mut Vec<Timing>) -> Result<PulseSchedule> {
    let n = drive.len();
    let t_w = super_pi_time(&drive, PulseKind::AlphaMax)?;
    let mut schedule = match start {
        Start::Heralded => PulseSchedule::new(n, InitialState::Phonon),
        Start::Injected { pair } => {
            if pair >= n {
                return Err(Error::InvalidMode { mode: pair, mode_count: n });
            }
            // Same collective rate, so the swap takes as long as the super pulse.
            let r = drive.rabi_rate();
            timings.push(Timing::new("t_pi", pi_pulse_time(r)?));
            PulseSchedule::new(n, InitialState::Photon { mode: pair }).segment(Drive::single(n, pair, r, 0.0)?, pi_pulse_time(r)?)
        }
    };
    schedule = schedule.segment(drive, t_w);
    timings.push(Timing::new("t_W", t_w));
    timings.push(Timing::new("total", schedule.total_duration()));
    Ok(schedule)
}

/// Phonon to equal-weight W state with the super π-pulse.
pub fn synthesize_w_standard(n: usize, alpha: f64, start: Start, engine: Engine) -> Result<ProtocolResult> {
    require_pairs(n, 2)?;
    require_positive("alpha", alpha)?;
    let mut timings = Vec::new();
    let schedule = synthesis_schedule(Drive::uniform(n, alpha), start, &mut timings)?;
    ProtocolResult::from_schedule("w-standard", schedule, engine, w_standard_target(n)?, timings)
}

/// Phonon to the perfect W state: `r_1 = alpha sqrt(N-1)`, others `alpha`.
pub fn synthesize_w_perfect(n: usize, alpha: f64, start: Start, engine: Engine) -> Result<ProtocolResult> {
    require_pairs(n, 2)?;
    require_positive("alpha", alpha)?;
    let mut r = vec![alpha; n];
    r[0] = alpha * ((n - 1) as f64).sqrt();
    let drive = Drive::from_polar(&r, &vec![0.0; n])?;
    let mut timings = Vec::new();
    let schedule = synthesis_schedule(drive, start, &mut timings)?;
    ProtocolResult::from_schedule("w-perfect", schedule, engine, w_perfect_target(n)?, timings)
}

/// Drive for the lasers-on protocol: `r_1 = ratio * alpha`, others `alpha`.
///
/// In the plus branches the injected mode ends with the opposite sign to the
/// others, so their drives carry phase π and the output is the W state with
/// all-positive amplitudes. The minus branches need no phase.
pub fn lasers_on_drive(n: usize, alpha: f64, variant: LasersOnVariant) -> Result<Drive> {
    require_pairs(n, 2)?;
    require_positive("alpha", alpha)?;
    let mut r = vec![alpha; n];
    r[0] = alpha * variant.ratio(n);
    let mut phi = vec![if variant.is_plus() { PI } else { 0.0 }; n];
    phi[0] = 0.0;
    Drive::from_polar(&r, &phi)
}

/// Photon injected into pump 0 while every drive is already on; the W state
/// appears at `t_W = π/sqrt(eta)`.
pub fn synthesize_w_lasers_on(n: usize, alpha: f64, variant: LasersOnVariant, engine: Engine) -> Result<ProtocolResult> {
    let drive = lasers_on_drive(n, alpha, variant)?;
    let t_w = PI / drive.rabi_rate();
    let schedule = PulseSchedule::new(n, InitialState::Photon { mode: 0 }).segment(drive, t_w);
    let target = if variant.is_perfect() {
        w_perfect_target(n)?
    } else {
        w_standard_target(n)?
    };
    ProtocolResult::from_schedule(
        &format!("w-lasers-on/{}", variant.name()),
        schedule,
        engine,
        target,
        vec![Timing::new("t_W", t_w)],
    )
}

/// Frequency translation between pump modes `i` and `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub n_pairs: usize,
    pub i: usize,
    pub j: usize,
    pub r_i: f64,
    pub r_j: f64,
    pub phi_i: f64,
    pub phi_j: f64,
    /// Fock amplitudes `c_k` of the input in mode `i`.
    pub input: Vec<C64>,
}

impl Translation {
    pub fn single_photon(n_pairs: usize, i: usize, j: usize, r: f64) -> Translation {
        Translation {
            n_pairs,
            i,
            j,
            r_i: r,
            r_j: r,
            phi_i: 0.0,
            phi_j: 0.0,
            input: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }
    }
}

/// Phase picked up by Fock level `k` on its way from mode `i` to mode `j`:
/// each quantum collects `-i e^{-i phi_i}` into the phonon and `-i e^{i phi_j}`
/// back out, i.e. `k (phi_j - phi_i + π)`.
pub fn translation_phase(k: u32, phi_i: f64, phi_j: f64) -> f64 {
    f64::from(k) * (phi_j - phi_i + PI)
}

/// Two π-pulses moving the state of pump `i` through the phonon into pump `j`.
pub fn frequency_translate(t: &Translation, engine: Engine) -> Result<ProtocolResult> {
    let n = t.n_pairs;
    if t.i == t.j {
        return Err(Error::Config("translation needs two different modes".into()));
    }
    for &m in &[t.i, t.j] {
        if m >= n {
            return Err(Error::InvalidMode { mode: m, mode_count: n });
        }
    }
    if t.input.is_empty() {
        return Err(Error::Config("translation input has no Fock amplitudes".into()));
    }
    let (t_i, t_j) = (pi_pulse_time(t.r_i)?, pi_pulse_time(t.r_j)?);
    let schedule = PulseSchedule::new(
        n,
        InitialState::Superposition {
            mode: t.i,
            amplitudes: t.input.clone(),
        },
    )
    .segment(Drive::single(n, t.i, t.r_i, t.phi_i)?, t_i)
    .segment(Drive::single(n, t.j, t.r_j, t.phi_j)?, t_j);
    let basis = schedule.basis()?;
    let norm: f64 = t.input.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut target = Ket::zeros(&basis);
    let mut occ = vec![0u32; n + 1];
    for (k, c) in t.input.iter().enumerate() {
        occ[t.j] = k as u32;
        let phase = C64::from_polar(1.0, translation_phase(k as u32, t.phi_i, t.phi_j));
        target.set_amplitude(&occ, c * phase / norm)?;
    }
    let timings = vec![
        Timing::new("t_pi_i", t_i),
        Timing::new("t_pi_j", t_j),
        Timing::new("t_qft", t_i + t_j),
    ];
    ProtocolResult::from_schedule("qft", schedule, engine, target, timings)
}

/// Herald block attached to a schedule, evaluated separately.
pub fn herald_report(spec: &HeraldSpec) -> Result<ProtocolResult> {
    herald_phonon(spec.xi, spec.cutoff)
}
