use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;

use fbs_core::analysis::{probability_trace, single_excitation_patterns, write_atomically, write_svg, Trace};
use fbs_core::dynamics::oracle::{run_oracle, Check, OracleConfig, DEFAULT_SEED};
use fbs_core::dynamics::Integrator;
use fbs_core::fockspace::text::{write_density, write_ket};
use fbs_core::fockspace::Pattern;
use fbs_core::hamiltonians::SystemSpec;
use fbs_core::protocols::{
    execute, frequency_translate, herald_phonon, lasers_on_drive, pi_pulse_swap, synthesize_w_lasers_on,
    synthesize_w_perfect, synthesize_w_standard, w_perfect_target, w_standard_target, Engine, LasersOnVariant,
    LossModel, ProtocolResult, PulseSchedule, Start, State, Translation,
};

use crate::config::RunConfig;
use crate::error::CliError;

/// Flag values; `Some` overrides the run file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub out: Option<std::path::PathBuf>,
    pub formats: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub gamma_over_g: Option<f64>,
    pub alpha_max: Option<f64>,
    pub n: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.preset {
            cfg.protocol.preset = Some(p.clone());
            cfg.protocol.schedule_file = None;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        if let Some(f) = &self.formats {
            cfg.output.formats = f.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(g) = self.gamma_over_g {
            let loss = cfg.loss.get_or_insert(crate::config::LossConfig {
                gamma_over_g: None,
                dt: None,
                method: None,
                tolerance: None,
            });
            loss.gamma_over_g = Some(g);
        }
        if let Some(a) = self.alpha_max {
            cfg.protocol.alpha_max = Some(a);
        }
        if let Some(n) = self.n {
            cfg.protocol.n = Some(n);
        }
    }
}

fn config_err(e: fbs_core::Error) -> CliError {
    if e.is_config() {
        CliError::Config(e.to_string())
    } else {
        CliError::Core(e)
    }
}

fn engine(cfg: &RunConfig) -> Result<Engine, CliError> {
    let gamma = cfg.gamma_over_g()?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(CliError::Config(format!("loss.gamma_over_g must be non-negative, got {gamma}")));
    }
    let loss = cfg.loss.as_ref();
    let method = match loss.and_then(|l| l.method.as_deref()) {
        None | Some("rk4") => Integrator::Rk4,
        Some("adaptive") => Integrator::Adaptive {
            tolerance: loss.and_then(|l| l.tolerance).unwrap_or(1e-10),
        },
        Some(m) => return Err(CliError::Config(format!("loss.method: unknown integrator {m:?}"))),
    };
    if gamma == 0.0 && loss.and_then(|l| l.dt).is_none() && method == Integrator::Rk4 {
        return Ok(Engine::Exact);
    }
    Ok(Engine::Lindblad(LossModel {
        gamma_over_g: gamma,
        dt: loss.and_then(|l| l.dt),
        method,
    }))
}

fn parse_start(cfg: &RunConfig) -> Result<Start, CliError> {
    match cfg.protocol.start.as_deref() {
        None | Some("heralded") => Ok(Start::Heralded),
        Some("injected") => Ok(Start::Injected {
            pair: cfg.protocol.inject_pair.unwrap_or(0),
        }),
        Some(s) => Err(CliError::Config(format!("protocol.start: expected heralded or injected, got {s:?}"))),
    }
}

/// Per-mode amplitude: `alpha`, or derived from `alpha_max` so that
/// `sqrt(eta) = alpha_max` for the drive shape at hand.
fn amplitude(cfg: &RunConfig, shape_norm: f64, default: f64) -> Result<f64, CliError> {
    let a = match (cfg.protocol.alpha_max, cfg.protocol.alpha) {
        (Some(m), _) => m / shape_norm,
        (None, Some(a)) => a,
        (None, None) => default,
    };
    if !(a > 0.0 && a.is_finite()) {
        return Err(CliError::Config(format!("protocol.alpha must be positive, got {a}")));
    }
    Ok(a)
}

fn run_preset(cfg: &RunConfig, preset: &str, engine: Engine) -> Result<ProtocolResult, CliError> {
    let p = &cfg.protocol;
    let n = p.n.or(cfg.system.as_ref().map(|s| s.n_pairs)).unwrap_or(3);
    let nf = n as f64;
    let result = match preset {
        "w-standard" => synthesize_w_standard(n, amplitude(cfg, nf.sqrt(), 2424.0)?, parse_start(cfg)?, engine),
        "w-perfect" => synthesize_w_perfect(n, amplitude(cfg, (2.0 * (nf - 1.0)).sqrt(), 2100.0)?, parse_start(cfg)?, engine),
        "w-lasers-on" => {
            let v = LasersOnVariant::parse(p.variant.as_deref().unwrap_or("standard_plus")).map_err(config_err)?;
            let norm = (v.ratio(n).powi(2) + nf - 1.0).sqrt();
            synthesize_w_lasers_on(n, amplitude(cfg, norm, 2637.0)?, v, engine)
        }
        "pi-pulse" => pi_pulse_swap(n, p.inject_pair.unwrap_or(0), amplitude(cfg, 1.0, 4200.0)?, 0.0, engine),
        "qft" => {
            let r = amplitude(cfg, 1.0, 4200.0)?;
            let re = p.input_re.clone().unwrap_or_else(|| vec![0.0, 1.0]);
            let im = p.input_im.clone().unwrap_or_default();
            if im.len() > re.len() {
                return Err(CliError::Config("protocol.input_im is longer than protocol.input_re".into()));
            }
            let t = Translation {
                n_pairs: n,
                i: p.i.unwrap_or(0),
                j: p.j.unwrap_or(1),
                r_i: p.r_i.unwrap_or(r),
                r_j: p.r_j.unwrap_or(r),
                phi_i: p.phi_i.unwrap_or(0.0),
                phi_j: p.phi_j.unwrap_or(0.0),
                input: re
                    .iter()
                    .enumerate()
                    .map(|(k, &x)| C64::new(x, im.get(k).copied().unwrap_or(0.0)))
                    .collect(),
            };
            frequency_translate(&t, engine)
        }
        "herald" => herald_phonon(C64::from_polar(p.xi_r.unwrap_or(0.3), p.xi_phi.unwrap_or(0.0)), p.cutoff.unwrap_or(8)),
        other => {
            return Err(CliError::Config(format!(
                "protocol.preset: unknown preset {other:?} (w-standard, w-perfect, w-lasers-on, qft, herald, pi-pulse)"
            )))
        }
    };
    result.map_err(config_err)
}

fn run_schedule(cfg: &RunConfig, path: &Path, engine: Engine) -> Result<ProtocolResult, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("protocol.schedule_file {}: {e}", path.display())))?;
    let schedule = PulseSchedule::from_toml_str(&text)
        .map_err(|e| CliError::Config(format!("protocol.schedule_file {}: {e}", path.display())))?;
    let n = schedule.n_pairs;
    let basis = schedule.basis().map_err(config_err)?;
    let target = match cfg.protocol.target.as_deref() {
        None | Some("phonon") => {
            let mut occ = vec![0; n + 1];
            occ[n] = 1;
            fbs_core::fockspace::Ket::basis_state(&basis, &occ)
        }
        Some("w-standard") => w_standard_target(n),
        Some("w-perfect") => w_perfect_target(n),
        Some(t) => return Err(CliError::Config(format!("protocol.target: unknown target {t:?}"))),
    }
    .map_err(config_err)?;
    if target.basis().dim() != basis.dim() {
        return Err(CliError::Config("protocol.target does not fit the schedule's basis".into()));
    }
    let target = fbs_core::fockspace::Ket::new(&basis, target.amplitudes().to_vec()).map_err(config_err)?;
    let run = execute(&schedule, engine).map_err(config_err)?;
    Ok(ProtocolResult {
        name: path.display().to_string(),
        fidelity: run.state.fidelity(&target)?,
        global_phase: run.state.global_phase(&target)?,
        final_state: run.state,
        target_state: target,
        timings: vec![fbs_core::protocols::Timing::new("total", schedule.total_duration())],
        success_probability: run.success_probability,
        schedule: Some(schedule),
    })
}

pub fn report(result: &ProtocolResult, spec: &SystemSpec, engine: &Engine) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "protocol: {}", result.name);
    let _ = writeln!(
        s,
        "engine: {}",
        match engine {
            Engine::Exact => "exact".to_string(),
            Engine::WeiNorman => "wei-norman".to_string(),
            Engine::Lindblad(l) => format!("lindblad gamma/g = {}", l.gamma_over_g),
        }
    );
    let _ = writeln!(s, "fidelity: {:.6}", result.fidelity);
    if let Some(phase) = result.global_phase {
        let _ = writeln!(s, "global phase: {phase:.9} rad");
    }
    let _ = writeln!(s, "success probability: {:.6}", result.success_probability);
    let _ = writeln!(s, "g: {:.6e} rad/s (1 gt = {:.6e} s)", spec.g, spec.seconds(1.0));
    for t in &result.timings {
        let _ = writeln!(s, "{}: gt = {:.9e} = {:.6e} s", t.name, t.gt, spec.seconds(t.gt));
    }
    for (i, occ) in result.final_state.basis().iter().enumerate() {
        let p = result.final_state.populations()[i];
        if p > 1e-12 {
            let _ = writeln!(s, "P{:?} = {p:.9}", occ);
        }
    }
    s
}

fn trace_patterns(schedule: &PulseSchedule) -> Vec<(String, Pattern)> {
    if schedule.initial_state.excitations() <= 1 {
        single_excitation_patterns(schedule.n_pairs)
    } else {
        (0..=schedule.n_pairs)
            .map(|m| {
                let label = if m == schedule.n_pairs { "occupied_ph".to_string() } else { format!("occupied_{}", m + 1) };
                (label, Pattern::Not(Box::new(Pattern::Mode { mode: m, count: 0 })))
            })
            .collect()
    }
}

fn emit_trace(cfg: &RunConfig, trace: &Trace, stem: &str) -> Result<Vec<String>, CliError> {
    let dir = &cfg.output.dir;
    let mut written = Vec::new();
    if cfg.wants("csv") {
        let p = dir.join(format!("{stem}.csv"));
        trace.write_csv(&p)?;
        written.push(p.display().to_string());
    }
    if cfg.wants("svg") {
        let p = dir.join(format!("{stem}.svg"));
        let y = if trace.x_label == "gt" { "probability" } else { "fidelity" };
        write_svg(trace, y, &p)?;
        written.push(p.display().to_string());
    }
    Ok(written)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| {
        CliError::Core(fbs_core::Error::Io {
            path: dir.display().to_string(),
            source,
        })
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let engine = engine(cfg)?;
    let result = match (&cfg.protocol.preset, &cfg.protocol.schedule_file) {
        (Some(p), None) => run_preset(cfg, p, engine)?,
        (None, Some(f)) => run_schedule(cfg, f, engine)?,
        (None, None) => return Err(CliError::Config("protocol: set either preset or schedule_file".into())),
        (Some(_), Some(_)) => unreachable!("validated"),
    };
    let n = result.schedule.as_ref().map_or(1, |s| s.n_pairs);
    let spec = cfg.system_spec(n)?;
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    let state_text = match &result.final_state {
        State::Pure(k) => write_ket(k),
        State::Mixed(r) => write_density(r),
    };
    write_atomically(&dir.join("final_state.txt"), &state_text)?;
    let mut text = report(&result, &spec, &engine);
    if let Some(schedule) = &result.schedule {
        let samples = cfg.protocol.samples.unwrap_or(201);
        let mut trace = probability_trace(schedule, engine, &trace_patterns(schedule), samples, schedule.initial_state.excitations() <= 1)?;
        trace.metadata.insert("protocol".into(), result.name.clone());
        for w in emit_trace(cfg, &trace, "trace")? {
            let _ = writeln!(text, "wrote {w}");
        }
    }
    write_atomically(&dir.join("report.txt"), &text)?;
    Ok(text)
}

pub fn oracle_check(cfg: &RunConfig, n: Option<usize>, corrupt: bool) -> Result<String, CliError> {
    let mut oc = OracleConfig {
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        corrupt,
        ..OracleConfig::default()
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Config("--n must be at least 1".into()));
        }
        oc.pair_counts = vec![n];
    }
    let report = run_oracle(&oc)?;
    let mut s = format!("seed: {}\n", oc.seed);
    for check in [Check::WeiNorman, Check::Beamsplitter, Check::FockTwo] {
        let count = report.cases.iter().filter(|c| c.check == check).count();
        if count > 0 {
            let _ = writeln!(s, "{}: {count} cases, max error {:.3e}", check.name(), report.max_error(check));
        }
    }
    let breaches: Vec<String> = report.breaches().map(|c| c.to_string()).collect();
    if !breaches.is_empty() {
        return Err(CliError::Breach(format!("{s}{}", breaches.join("\n"))));
    }
    Ok(s)
}

/// Figure recipes: name, schedule, W-time, description.
fn figure_schedules() -> Result<Vec<(&'static str, PulseSchedule, f64, String)>, CliError> {
    use fbs_core::hamiltonians::Drive;
    use fbs_core::protocols::InitialState;
    let n = 3;
    let mut out = Vec::new();

    let a = 2424.0;
    let t_w = std::f64::consts::FRAC_PI_2 / (a * 3f64.sqrt());
    let s = PulseSchedule::new(n, InitialState::Phonon).segment(Drive::uniform(n, a), 6.0 * t_w);
    out.push(("fig4a", s, t_w, format!("standard W, N=3, alpha={a}")));

    let a = 2100.0;
    let perfect = Drive::from_polar(&[a * 2f64.sqrt(), a, a], &[0.0; 3])?;
    let t_w = std::f64::consts::FRAC_PI_2 / perfect.rabi_rate();
    let s = PulseSchedule::new(n, InitialState::Phonon).segment(perfect, 6.0 * t_w);
    out.push(("fig4b", s, t_w, format!("perfect W, N=3, alpha={a}")));

    for (name, a, v) in [
        ("fig6a", 2637.0, LasersOnVariant::StandardPlus),
        ("fig6b", 1365.0, LasersOnVariant::StandardMinus),
    ] {
        let d = lasers_on_drive(n, a, v)?;
        let t_w = std::f64::consts::PI / d.rabi_rate();
        let s = PulseSchedule::new(n, InitialState::Photon { mode: 0 }).segment(d, 6.0 * t_w);
        out.push((name, s, t_w, format!("lasers-on {}, N=3, alpha={a}", v.name())));
    }
    Ok(out)
}

pub fn figures(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    create_dir(&cfg.output.dir)?;
    let samples = cfg.protocol.samples.unwrap_or(601);
    let mut s = String::new();
    for (name, schedule, t_w, desc) in figure_schedules()? {
        let mut trace = probability_trace(&schedule, Engine::Exact, &single_excitation_patterns(3), samples, true)?;
        // W states appear at odd multiples of t_W.
        let total = schedule.total_duration();
        trace.markers = (0..)
            .map(|k| (2 * k + 1) as f64 * t_w)
            .take_while(|&t| t <= total * (1.0 + 1e-12))
            .collect();
        trace.metadata.insert("figure".into(), desc.clone());
        let _ = writeln!(s, "{name}: {desc}, t_W = {t_w:.9e}");
        for w in emit_trace(cfg, &trace, name)? {
            let _ = writeln!(s, "wrote {w}");
        }
    }
    Ok(s)
}
