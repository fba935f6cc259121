use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fockspace::{Basis, Ket};
use crate::hamiltonians::{Drive, PumpLayout};

/// `cos θ |vac, 1_ph> - i sin θ |φ, 0_ph>` with `θ = gt sqrt(eta)` and
/// `|φ> = sum_n (alpha_n/sqrt(eta)) |1_n>`.
///
/// Returned on the single-excitation basis of `drive.len()` pump modes.
/// Regular at every `θ`, including where the factored propagator is singular.
pub fn closed_form_phonon_start(drive: &Drive, gt: f64) -> Result<Ket> {
    let basis = Basis::single_excitation(drive.len())?;
    closed_form_fock_start_on(&basis, drive, 1, gt)
}

/// Evolution of `k` phonons with the pump modes in vacuum, on the smallest
/// basis holding the result (every mode cut at `k`, total excitation `k`).
pub fn closed_form_fock_start(drive: &Drive, k: u32, gt: f64) -> Result<Ket> {
    let basis = Basis::excitation_sector(drive.len(), k.max(1))?;
    closed_form_fock_start_on(&basis, drive, k, gt)
}

/// Same as [`closed_form_fock_start`] on a caller-supplied pump⊗phonon basis.
///
/// Amplitude of `|m_1..m_N, k-j>` with `j = sum m_l`:
/// `sqrt(k!/(k-j)!) cos^{k-j}θ (-i sinθ/sqrt(eta))^j prod_l alpha_l^{m_l}/sqrt(m_l!)`.
pub fn closed_form_fock_start_on(basis: &Arc<Basis>, drive: &Drive, k: u32, gt: f64) -> Result<Ket> {
    let layout = PumpLayout { n_pairs: drive.len() };
    if basis.mode_count() != layout.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: layout.mode_count(),
            got: basis.mode_count(),
        });
    }
    let eta = drive.require_active()?;
    let cutoffs_hold = basis.cutoffs().iter().all(|&c| c >= k);
    let cap_holds = basis.total_cap().is_none_or(|cap| cap >= k);
    if !(cutoffs_hold && cap_holds) {
        return Err(Error::Truncation(format!(
            "a {k}-phonon start needs every cutoff and the total cap to be at least {k}"
        )));
    }
    let theta = gt * eta.sqrt();
    let (cos, sin) = (theta.cos(), theta.sin());
    let spread = C64::new(0.0, -sin / eta.sqrt());
    let k_fact = ln_factorial(k);
    let mut ket = Ket::zeros(basis);
    for (i, occ) in basis.iter().enumerate() {
        let pumps = &occ[..layout.n_pairs];
        let j: u32 = pumps.iter().sum();
        if j > k || occ[layout.phonon()] != k - j {
            continue;
        }
        let mut amp = C64::new(
            (0.5 * (k_fact - ln_factorial(k - j))).exp() * cos.powi((k - j) as i32),
            0.0,
        ) * spread.powu(j);
        for (alpha, &m) in drive.amplitudes().iter().zip(pumps) {
            if m > 0 {
                amp *= alpha.powu(m) / ln_factorial(m).exp().sqrt();
            }
        }
        ket.amplitudes_mut()[i] = amp;
    }
    Ok(ket)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| f64::from(i).ln()).sum()
}

/// Photon injected into pump mode 0 with every drive already on.
///
/// `c (cos θ - 1)|φ, 0> - i c sin θ |vac, 1> + |1_0, 0>` where
/// `c = <φ|1_0> = conj(alpha_0)/sqrt(eta)`.
pub fn closed_form_photon_start(drive: &Drive, gt: f64) -> Result<Ket> {
    closed_form_photon_start_in(drive, 0, gt)
}

/// Photon injected into an arbitrary pump mode.
pub fn closed_form_photon_start_in(drive: &Drive, mode: usize, gt: f64) -> Result<Ket> {
    let n = drive.len();
    if mode >= n {
        return Err(Error::InvalidMode { mode, mode_count: n });
    }
    let eta = drive.require_active()?;
    let root = eta.sqrt();
    let basis = Basis::single_excitation(n)?;
    let theta = gt * root;
    let c = drive.amplitudes()[mode].conj() / root;
    let mut ket = Ket::zeros(&basis);
    let mut occ = vec![0u32; n + 1];
    for (l, alpha) in drive.amplitudes().iter().enumerate() {
        occ[l] = 1;
        let idx = basis.index_of(&occ).expect("single-excitation state");
        ket.amplitudes_mut()[idx] += c * (theta.cos() - 1.0) * alpha / root;
        occ[l] = 0;
    }
    occ[mode] = 1;
    let idx = basis.index_of(&occ).expect("single-excitation state");
    ket.amplitudes_mut()[idx] += C64::new(1.0, 0.0);
    occ[mode] = 0;
    occ[n] = 1;
    let idx = basis.index_of(&occ).expect("single-excitation state");
    ket.amplitudes_mut()[idx] = C64::new(0.0, -theta.sin()) * c;
    Ok(ket)
}

/// Normalized `|φ> = sum_n (alpha_n/sqrt(eta)) |1_n, 0_ph>` on the
/// single-excitation basis.
pub fn drive_w_state(drive: &Drive) -> Result<Ket> {
    let eta = drive.require_active()?;
    let n = drive.len();
    let basis = Basis::single_excitation(n)?;
    let mut ket = Ket::zeros(&basis);
    let mut occ = vec![0u32; n + 1];
    for (l, alpha) in drive.amplitudes().iter().enumerate() {
        occ[l] = 1;
        ket.set_amplitude(&occ, alpha / eta.sqrt())?;
        occ[l] = 0;
    }
    Ok(ket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_exact;
    use crate::fockspace::Pattern;
    use crate::hamiltonians::build_classical_pump_hamiltonian;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sample_drive() -> Drive {
        Drive::from_polar(&[1.1, 0.6, 2.0], &[0.5, -1.3, 2.9]).unwrap()
    }

    #[test]
    fn phonon_start_endpoints() {
        let drive = Drive::uniform(3, 2.0);
        let root = drive.eta().sqrt();
        let start = closed_form_phonon_start(&drive, 0.0).unwrap();
        assert_eq!(start.amplitude_of(&[0, 0, 0, 1]).unwrap(), C64::new(1.0, 0.0));
        let w = closed_form_phonon_start(&drive, FRAC_PI_2 / root).unwrap();
        let phi = drive_w_state(&drive).unwrap();
        // -i |φ>
        assert!(w.distance(&phi.scaled(C64::new(0.0, -1.0))).unwrap() < 1e-15);
        for m in 0..3 {
            let p = Pattern::single(4, m).probability(&w);
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn phonon_start_matches_exact() {
        let drive = sample_drive();
        let b = Basis::single_excitation(3).unwrap();
        let h = build_classical_pump_hamiltonian(&drive, &b).unwrap();
        let psi0 = Ket::basis_state(&b, &[0, 0, 0, 1]).unwrap();
        for &gt in &[0.05, 0.37, 1.2, 4.0] {
            let cf = closed_form_phonon_start(&drive, gt).unwrap();
            let ex = evolve_exact(&h, &psi0, gt).unwrap();
            assert!(cf.distance(&ex).unwrap() < 1e-12);
        }
    }

    #[test]
    fn fock_start_reductions() {
        let drive = sample_drive();
        let one = closed_form_fock_start(&drive, 1, 0.4).unwrap();
        let phonon = closed_form_phonon_start(&drive, 0.4).unwrap();
        assert_eq!(one, phonon);
        let zero = closed_form_fock_start(&drive, 0, 0.9).unwrap();
        assert_eq!(zero.amplitude_of(&[0, 0, 0, 0]).unwrap(), C64::new(1.0, 0.0));
        assert!((zero.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_phonons_match_exact() {
        let drive = Drive::uniform(2, 1.5);
        let b = Basis::excitation_sector(2, 2).unwrap();
        let h = build_classical_pump_hamiltonian(&drive, &b).unwrap();
        let psi0 = Ket::basis_state(&b, &[0, 0, 2]).unwrap();
        let gt = FRAC_PI_2 / drive.eta().sqrt();
        let cf = closed_form_fock_start(&drive, 2, gt).unwrap();
        let ex = evolve_exact(&h, &psi0, gt).unwrap();
        assert!(cf.distance(&ex).unwrap() < 1e-10);
        assert!(cf.amplitude_of(&[0, 0, 2]).unwrap().norm() < 1e-15);
        // (-i)^2 (a_1† + a_2†)^2 / (2 sqrt 2) |0>: amplitudes -1/2, -1/sqrt2, -1/2
        assert!((cf.amplitude_of(&[2, 0, 0]).unwrap() - C64::new(-0.5, 0.0)).norm() < 1e-12);
        assert!((cf.amplitude_of(&[1, 1, 0]).unwrap() - C64::new(-0.5f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fock_start_needs_room() {
        let drive = Drive::uniform(2, 1.0);
        let b = Basis::excitation_sector(2, 2).unwrap();
        assert!(matches!(
            closed_form_fock_start_on(&b, &drive, 3, 0.1),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn photon_start_matches_exact_and_endpoints() {
        let drive = sample_drive();
        let b = Basis::single_excitation(3).unwrap();
        let h = build_classical_pump_hamiltonian(&drive, &b).unwrap();
        let psi0 = Ket::basis_state(&b, &[1, 0, 0, 0]).unwrap();
        for &gt in &[0.0, 0.21, 0.8, 3.3] {
            let cf = closed_form_photon_start(&drive, gt).unwrap();
            let ex = evolve_exact(&h, &psi0, gt).unwrap();
            assert!(cf.distance(&ex).unwrap() < 1e-12, "gt = {gt}");
        }
        // At θ = π the |φ> branch carries -2c.
        let root = drive.eta().sqrt();
        let full = closed_form_photon_start(&drive, PI / root).unwrap();
        let c = drive.amplitudes()[0].conj() / root;
        let phi = drive_w_state(&drive).unwrap();
        let injected = Ket::basis_state(&b, &[1, 0, 0, 0]).unwrap();
        let expected = injected.axpy(c * -2.0, &phi).unwrap();
        assert!(full.distance(&expected).unwrap() < 1e-12);
        assert!(closed_form_photon_start_in(&drive, 3, 0.1).is_err());
    }

    #[test]
    fn zero_drive_is_an_error() {
        let drive = Drive::uniform(2, 0.0);
        assert!(closed_form_phonon_start(&drive, 1.0).is_err());
        assert!(closed_form_photon_start(&drive, 1.0).is_err());
    }
}
