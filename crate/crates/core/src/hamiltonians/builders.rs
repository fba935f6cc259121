use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{Drive, SystemSpec};
use crate::error::{Error, Result};
use crate::fockspace::{product, Basis, LadderKind, SparseOp};

use LadderKind::{Lower, Raise};

/// Mode indices of a full-quantum basis: pumps, then Stokes, then the phonon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullLayout {
    pub n_pairs: usize,
}

impl FullLayout {
    pub fn pump(&self, n: usize) -> usize {
        n
    }

    pub fn stokes(&self, n: usize) -> usize {
        self.n_pairs + n
    }

    pub fn phonon(&self) -> usize {
        2 * self.n_pairs
    }

    pub fn mode_count(&self) -> usize {
        2 * self.n_pairs + 1
    }
}

/// Mode indices when the Stokes modes are classical: pumps, then the phonon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PumpLayout {
    pub n_pairs: usize,
}

impl PumpLayout {
    pub fn pump(&self, n: usize) -> usize {
        n
    }

    pub fn phonon(&self) -> usize {
        self.n_pairs
    }

    pub fn mode_count(&self) -> usize {
        self.n_pairs + 1
    }
}

fn expect_modes(basis: &Basis, expected: usize) -> Result<()> {
    if basis.mode_count() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            got: basis.mode_count(),
        })
    }
}

/// `term + term†` for a ladder monomial.
fn with_conjugate(basis: &Arc<Basis>, factors: &[(usize, LadderKind)]) -> Result<SparseOp> {
    let term = product(basis, factors)?;
    term.add(&term.adjoint())
}

/// Finite window of the unsuppressed optical ladder.
///
/// Modes `0..=2*window` are the optical resonances `m = -window..=window` in
/// increasing frequency, with the phonon last. The interaction is
/// `coupling * sum_m a_m a†_{m-1} b† + h.c.`: a photon scatters one rung down
/// the ladder while emitting a phonon. A mode given cutoff 0 is suppressed.
pub fn build_ladder_hamiltonian(basis: &Arc<Basis>, coupling: f64, window: usize) -> Result<SparseOp> {
    let optical = 2 * window + 1;
    expect_modes(basis, optical + 1)?;
    let phonon = optical;
    let mut h = SparseOp::zero(basis);
    for m in 1..optical {
        h = h.add(&with_conjugate(basis, &[(m, Lower), (m - 1, Raise), (phonon, Raise)])?)?;
    }
    Ok(h.scale(C64::new(coupling, 0.0)))
}

/// Pump/Stokes/phonon Hamiltonian left after every third ladder mode is
/// suppressed: `sum_n (a_pn a†_sn b† + a†_pn a_sn b)`, plus the free part
/// `sum_n (ω_pn n_pn + ω_sn n_sn)/g + Ω n_b/g` when `include_free` is set.
pub fn build_truncated_hamiltonian(spec: &SystemSpec, basis: &Arc<Basis>, include_free: bool) -> Result<SparseOp> {
    spec.validate()?;
    let layout = FullLayout { n_pairs: spec.n_pairs };
    expect_modes(basis, layout.mode_count())?;
    let mut h = SparseOp::zero(basis);
    for n in 0..spec.n_pairs {
        let factors = [(layout.pump(n), Lower), (layout.stokes(n), Raise), (layout.phonon(), Raise)];
        h = h.add(&with_conjugate(basis, &factors)?)?;
    }
    if include_free {
        if !spec.has_frequencies() {
            return Err(Error::Config(
                "free Hamiltonian requested but mode frequencies are not set".into(),
            ));
        }
        let g = spec.g;
        let free = SparseOp::diagonal(basis, |occ| {
            let optical: f64 = (0..spec.n_pairs)
                .map(|n| {
                    spec.omega_pump[n] * f64::from(occ[layout.pump(n)])
                        + spec.omega_stokes[n] * f64::from(occ[layout.stokes(n)])
                })
                .sum();
            (optical + spec.omega_phonon * f64::from(occ[layout.phonon()])) / g
        });
        h = h.add(&free)?;
    }
    Ok(h)
}

/// Collective pump operator `A = sum_n conj(alpha_n) a_pn`.
pub fn collective_lowering(drive: &Drive, basis: &Arc<Basis>) -> Result<SparseOp> {
    let layout = PumpLayout { n_pairs: drive.len() };
    expect_modes(basis, layout.mode_count())?;
    let mut a = SparseOp::zero(basis);
    for (n, alpha) in drive.amplitudes().iter().enumerate() {
        if alpha.norm_sqr() > 0.0 {
            a = a.add(&product(basis, &[(layout.pump(n), Lower)])?.scale(alpha.conj()))?;
        }
    }
    Ok(a)
}

/// Strong-drive ("super beamsplitter") Hamiltonian `A b† + A† b`.
pub fn build_classical_pump_hamiltonian(drive: &Drive, basis: &Arc<Basis>) -> Result<SparseOp> {
    let layout = PumpLayout { n_pairs: drive.len() };
    expect_modes(basis, layout.mode_count())?;
    let mut term = SparseOp::zero(basis);
    for (n, alpha) in drive.amplitudes().iter().enumerate() {
        if alpha.norm_sqr() > 0.0 {
            let hop = product(basis, &[(layout.pump(n), Lower), (layout.phonon(), Raise)])?;
            term = term.add(&hop.scale(alpha.conj()))?;
        }
    }
    term.add(&term.adjoint())
}

/// Two-mode squeezer generator `xi a_s† b† - conj(xi) a_s b` on a basis
/// whose mode 0 is the Stokes mode and mode 1 the phonon.
pub fn build_squeezer_generator(basis: &Arc<Basis>, xi: C64) -> Result<SparseOp> {
    expect_modes(basis, 2)?;
    let create = product(basis, &[(0, Raise), (1, Raise)])?;
    let annihilate = product(basis, &[(0, Lower), (1, Lower)])?;
    create.scale(xi).sub(&annihilate.scale(xi.conj()))
}

/// Beamsplitter generator `mu a† b - conj(mu) a b†` between pump mode `pair`
/// and the phonon (last mode).
pub fn build_beamsplitter_generator(basis: &Arc<Basis>, mu: C64, pair: usize) -> Result<SparseOp> {
    let phonon = basis.mode_count() - 1;
    if pair >= phonon {
        return Err(Error::InvalidMode {
            mode: pair,
            mode_count: phonon,
        });
    }
    let forward = product(basis, &[(pair, Raise), (phonon, Lower)])?;
    let backward = product(basis, &[(pair, Lower), (phonon, Raise)])?;
    forward.scale(mu).sub(&backward.scale(mu.conj()))
}

/// Beamsplitter parameter realised by driving one Stokes mode with amplitude
/// `alpha` for dimensionless time `gt`.
pub fn beamsplitter_mu(alpha: C64, gt: f64) -> C64 {
    C64::new(0.0, -gt) * alpha
}
