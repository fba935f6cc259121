//! Randomized comparison of the factored and closed-form paths against the
//! brute-force exponential.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::closed_form::closed_form_fock_start;
use super::exact::{evolve_exact, exp_apply};
use super::wei_norman::{singularity_distance, wei_norman_apply, WeiNormanCoefficients};
use crate::error::Result;
use crate::fockspace::{Basis, Ket};
use crate::hamiltonians::{beamsplitter_mu, build_beamsplitter_generator, build_classical_pump_hamiltonian, Drive};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Sampled angles stay this far from the coefficient singularities; closer in,
/// `tan θ` amplifies rounding in the factored product beyond the tolerance.
const SAMPLE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub seed: u64,
    pub pair_counts: Vec<usize>,
    pub samples: usize,
    /// L2 bound for the factored propagator on single-excitation bases.
    pub tolerance: f64,
    /// L2 bound for the two-phonon closed form.
    pub fock_tolerance: f64,
    /// Negative control: flips the sign of `Y` so every comparison fails.
    pub corrupt: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: DEFAULT_SEED,
            pair_counts: vec![1, 2, 3, 4],
            samples: 20,
            tolerance: 1e-8,
            fock_tolerance: 1e-6,
            corrupt: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    WeiNorman,
    Beamsplitter,
    FockTwo,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::WeiNorman => "wei-norman",
            Check::Beamsplitter => "beamsplitter",
            Check::FockTwo => "fock-2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub check: Check,
    pub n_pairs: usize,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub gt: f64,
    pub error: f64,
    pub tolerance: f64,
}

impl OracleCase {
    pub fn passed(&self) -> bool {
        self.error < self.tolerance
    }
}

impl std::fmt::Display for OracleCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} N={} gt={:.17e} r={:?} phi={:?} error={:.3e} (tolerance {:.1e})",
            self.check.name(),
            self.n_pairs,
            self.gt,
            self.r,
            self.phi,
            self.error,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub cases: Vec<OracleCase>,
}

impl OracleReport {
    pub fn max_error(&self, check: Check) -> f64 {
        self.cases
            .iter()
            .filter(|c| c.check == check)
            .map(|c| c.error)
            .fold(0.0, f64::max)
    }

    pub fn breaches(&self) -> impl Iterator<Item = &OracleCase> {
        self.cases.iter().filter(|c| !c.passed())
    }

    pub fn passed(&self) -> bool {
        self.breaches().next().is_none()
    }

    /// Case with the largest error relative to its tolerance.
    pub fn worst(&self) -> Option<&OracleCase> {
        self.cases
            .iter()
            .max_by(|a, b| (a.error / a.tolerance).total_cmp(&(b.error / b.tolerance)))
    }
}

fn random_drive(rng: &mut ChaCha8Rng, n: usize) -> Drive {
    let scale = 10f64.powf(rng.random_range(0.0..3.7));
    let r: Vec<f64> = (0..n).map(|_| scale * rng.random_range(0.1..1.0)).collect();
    let phi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    Drive::from_polar(&r, &phi).expect("lengths match")
}

fn random_angle(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let theta = rng.random_range(0.0..2.0 * PI);
        if singularity_distance(theta) > SAMPLE_MARGIN {
            return theta;
        }
    }
}

fn random_ket(rng: &mut ChaCha8Rng, basis: &std::sync::Arc<Basis>) -> Ket {
    let amps = (0..basis.dim())
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut ket = Ket::new(basis, amps).expect("dimension matches");
    ket.normalize().expect("random vector is nonzero");
    ket
}

/// Run every comparison; numerical failures of the propagators themselves
/// are returned as errors, tolerance breaches are reported in the cases.
pub fn run_oracle(cfg: &OracleConfig) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases = Vec::new();
    for &n in &cfg.pair_counts {
        let single = Basis::single_excitation(n)?;
        let double = Basis::excitation_sector(n, 2)?;
        for _ in 0..cfg.samples {
            let drive = random_drive(&mut rng, n);
            let gt = random_angle(&mut rng) / drive.rabi_rate();
            let psi0 = random_ket(&mut rng, &single);
            let case = |check, error, tolerance| OracleCase {
                check,
                n_pairs: n,
                r: drive.magnitudes(),
                phi: drive.phases(),
                gt,
                error,
                tolerance,
            };

            let h = build_classical_pump_hamiltonian(&drive, &single)?;
            let exact = evolve_exact(&h, &psi0, gt)?;
            let mut coeffs = WeiNormanCoefficients::new(drive.eta(), gt)?;
            if cfg.corrupt {
                coeffs.y = -coeffs.y;
            }
            let wn = wei_norman_apply(&coeffs, &drive, &psi0)?;
            cases.push(case(Check::WeiNorman, wn.distance(&exact)?, cfg.tolerance));

            if n == 1 {
                let mu = beamsplitter_mu(drive.amplitudes()[0], gt);
                let bs = exp_apply(&build_beamsplitter_generator(&single, mu, 0)?, &psi0)?;
                cases.push(case(Check::Beamsplitter, wn.distance(&bs)?, cfg.tolerance));
            }

            let h2 = build_classical_pump_hamiltonian(&drive, &double)?;
            let mut vac = vec![0u32; n + 1];
            vac[n] = 2;
            let two = Ket::basis_state(&double, &vac)?;
            let exact2 = evolve_exact(&h2, &two, gt)?;
            let closed = closed_form_fock_start(&drive, 2, gt)?;
            cases.push(case(Check::FockTwo, closed.distance(&exact2)?, cfg.fock_tolerance));
        }
    }
    Ok(OracleReport { cases })
}
