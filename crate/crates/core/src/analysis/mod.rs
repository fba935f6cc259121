//! Fidelities, probability traces, sweeps and their CSV/SVG output.

mod svg;
mod sweep;
mod trace;

pub use svg::{to_svg_string, write_svg};
pub use sweep::{fidelity_sweep, Metric, SweepParameter, SweepProtocol, SweepSpec};
pub use trace::{
    probability_trace, single_excitation_patterns, write_atomically, Series, Trace, PROBABILITY_SLACK, W_LABEL,
};

use crate::error::Result;
use crate::fockspace::Ket;
use crate::protocols::State;

/// `|<target|psi>|^2` or `<target|rho|target>`, clamped to [0, 1].
pub fn fidelity(state: &State, target: &Ket) -> Result<f64> {
    Ok(state.fidelity(target)?.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::Basis;

    #[test]
    fn trivial_fidelities() {
        let b = Basis::single_excitation(2).unwrap();
        let a = Ket::basis_state(&b, &[1, 0, 0]).unwrap();
        let c = Ket::basis_state(&b, &[0, 1, 0]).unwrap();
        assert_eq!(fidelity(&State::Pure(a.clone()), &a).unwrap(), 1.0);
        assert_eq!(fidelity(&State::Pure(a.clone()), &c).unwrap(), 0.0);
        assert_eq!(fidelity(&State::Mixed(a.to_density()), &a).unwrap(), 1.0);
        let other = Basis::single_excitation(3).unwrap();
        assert!(fidelity(&State::Pure(a), &Ket::zeros(&other)).is_err());
    }
}
