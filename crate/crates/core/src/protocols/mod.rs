//! Pulse schedules and the named protocols built from them.

mod file;
mod library;
mod schedule;

pub use library::{
    frequency_translate, herald_phonon, herald_report, lasers_on_drive, pi_pulse_schedule, pi_pulse_swap, pi_pulse_time,
    pump_superposition, qft_time, super_pi_time, synthesize_w_lasers_on, synthesize_w_perfect, synthesize_w_standard,
    tau_seconds, translation_phase, w_perfect_target, w_standard_target, LasersOnVariant, ProtocolResult, PulseKind,
    Start, Timing, Translation,
};
pub use schedule::{
    execute, sample, Engine, Execution, HeraldSpec, InitialState, LossModel, Measurement, PulseSchedule, Segment, State,
    MAX_PAIRS,
};
