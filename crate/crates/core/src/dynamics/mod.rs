//! Propagation: exact exponentials, the factored Wei–Norman path, closed-form
//! wavefunctions and a Lindblad integrator for lossy pump modes.

mod closed_form;
mod exact;
mod expm;
mod lindblad;
pub mod oracle;
mod wei_norman;

pub use closed_form::{
    closed_form_fock_start, closed_form_fock_start_on, closed_form_phonon_start, closed_form_photon_start,
    closed_form_photon_start_in, drive_w_state,
};
pub use exact::{evolve_exact, exp_apply, DENSE_LIMIT};
pub use expm::{dense_expm, krylov_expv};
pub use lindblad::{lindblad_evolve, Integrator, LindbladConfig, Lindbladian, STEP_BUDGET, TRACE_DRIFT_LIMIT};
pub use wei_norman::{
    lowering_transfer, raising_transfer, singularity_distance, theta_operator, wei_norman_apply, wei_norman_evolve,
    WeiNormanCoefficients, SINGULARITY_GUARD,
};
