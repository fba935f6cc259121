use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fockspace::{product, Basis, Ket, LadderKind, SparseOp};
use crate::hamiltonians::{Drive, PumpLayout};

use LadderKind::{Lower, Raise};

/// Closest allowed approach of `gt*sqrt(eta)` to `pi/2 + k*pi`.
pub const SINGULARITY_GUARD: f64 = 1e-6;

const MAX_TERMS: usize = 200;

/// Scalar coefficients of `U = exp(X A†b) exp(Y Θ) exp(Z A b†)`.
///
/// `X = Z = -i tan(θ)/sqrt(eta)` and `Y = -ln(cos θ)/eta` with
/// `θ = gt*sqrt(eta)`. `Y` is complex once `cos θ < 0` (principal log).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeiNormanCoefficients {
    pub x: C64,
    pub y: C64,
    pub z: C64,
    pub eta: f64,
    pub gt: f64,
}

impl WeiNormanCoefficients {
    pub fn new(eta: f64, gt: f64) -> Result<WeiNormanCoefficients> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidDrive(format!("eta must be positive, got {eta}")));
        }
        if !gt.is_finite() {
            return Err(Error::InvalidDrive(format!("gt must be finite, got {gt}")));
        }
        let root = eta.sqrt();
        let theta = gt * root;
        let distance = singularity_distance(theta);
        if distance < SINGULARITY_GUARD {
            return Err(Error::NearSingularity { angle: theta, distance });
        }
        let x = C64::new(0.0, -theta.tan() / root);
        let y = -C64::new(theta.cos(), 0.0).ln() / eta;
        Ok(WeiNormanCoefficients { x, y, z: x, eta, gt })
    }

    pub fn theta(&self) -> f64 {
        self.gt * self.eta.sqrt()
    }
}

/// Distance from `theta` to the nearest `pi/2 + k*pi`.
pub fn singularity_distance(theta: f64) -> f64 {
    let r = (theta - FRAC_PI_2).rem_euclid(PI);
    r.min(PI - r)
}

fn require_pump_basis(drive: &Drive, basis: &Basis) -> Result<PumpLayout> {
    let layout = PumpLayout { n_pairs: drive.len() };
    if basis.mode_count() != layout.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: layout.mode_count(),
            got: basis.mode_count(),
        });
    }
    Ok(layout)
}

/// `A† b = sum_n alpha_n a_pn† b`.
pub fn raising_transfer(drive: &Drive, basis: &Arc<Basis>) -> Result<SparseOp> {
    let layout = require_pump_basis(drive, basis)?;
    let mut op = SparseOp::zero(basis);
    for (n, alpha) in drive.amplitudes().iter().enumerate() {
        if alpha.norm_sqr() > 0.0 {
            let hop = product(basis, &[(layout.pump(n), Raise), (layout.phonon(), Lower)])?;
            op = op.add(&hop.scale(*alpha))?;
        }
    }
    Ok(op)
}

/// `A b† = sum_n conj(alpha_n) a_pn b†`.
pub fn lowering_transfer(drive: &Drive, basis: &Arc<Basis>) -> Result<SparseOp> {
    Ok(raising_transfer(drive, basis)?.adjoint())
}

/// `Θ = [A†b, A b†]`, assembled from four-operator monomials so that no
/// intermediate state is lost to truncation. On any basis it equals
/// `A†A - eta n_b` away from the cutoff edge.
pub fn theta_operator(drive: &Drive, basis: &Arc<Basis>) -> Result<SparseOp> {
    let layout = require_pump_basis(drive, basis)?;
    let b = layout.phonon();
    let mut theta = SparseOp::zero(basis);
    for (m, am) in drive.amplitudes().iter().enumerate() {
        for (n, an) in drive.amplitudes().iter().enumerate() {
            let weight = am * an.conj();
            if weight.norm_sqr() == 0.0 {
                continue;
            }
            let (pm, pn) = (layout.pump(m), layout.pump(n));
            // a_m† b a_n b† - a_n b† a_m† b
            let forward = product(basis, &[(pm, Raise), (b, Lower), (pn, Lower), (b, Raise)])?;
            let backward = product(basis, &[(pn, Lower), (b, Raise), (pm, Raise), (b, Lower)])?;
            theta = theta.add(&forward.sub(&backward)?.scale(weight))?;
        }
    }
    Ok(theta)
}

/// `exp(c * op) v` by a Taylor series, split into substeps so each has
/// `|c| ||op||_1 <= 1`.
fn series_exp_apply(op: &SparseOp, c: C64, v: &[C64]) -> Result<Vec<C64>> {
    let scale = c.norm() * op.norm_one();
    if scale == 0.0 {
        return Ok(v.to_vec());
    }
    let steps = scale.ceil().max(1.0) as usize;
    let h = c / steps as f64;
    let mut out = v.to_vec();
    let mut term = vec![C64::new(0.0, 0.0); v.len()];
    let mut next = vec![C64::new(0.0, 0.0); v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&out);
        let mut converged = false;
        for k in 1..=MAX_TERMS {
            op.apply_into(&term, &mut next);
            let f = h / k as f64;
            let mut term_norm = 0.0;
            for (t, n) in term.iter_mut().zip(&next) {
                *t = n * f;
                term_norm += t.norm_sqr();
            }
            for (o, t) in out.iter_mut().zip(&term) {
                *o += t;
            }
            let out_norm: f64 = out.iter().map(|x| x.norm_sqr()).sum();
            if term_norm == 0.0 || term_norm <= 1e-36 * out_norm {
                converged = true;
                break;
            }
        }
        if !converged {
            let residual = term.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            return Err(Error::SeriesNotConverged {
                terms: MAX_TERMS,
                residual,
            });
        }
    }
    Ok(out)
}

/// Evolve under `A b† + A† b` with the factored propagator.
///
/// The basis must hold the `n_pairs` pump modes followed by the phonon.
pub fn wei_norman_evolve(drive: &Drive, psi0: &Ket, gt: f64) -> Result<Ket> {
    let eta = drive.require_active()?;
    if gt == 0.0 {
        require_pump_basis(drive, psi0.basis())?;
        return Ok(psi0.clone());
    }
    let coeffs = WeiNormanCoefficients::new(eta, gt)?;
    wei_norman_apply(&coeffs, drive, psi0)
}

/// Apply the three factors with explicitly supplied coefficients.
pub fn wei_norman_apply(coeffs: &WeiNormanCoefficients, drive: &Drive, psi0: &Ket) -> Result<Ket> {
    let basis = psi0.basis();
    let up = raising_transfer(drive, basis)?;
    let down = up.adjoint();
    let theta = theta_operator(drive, basis)?;
    let v = series_exp_apply(&down, coeffs.z, psi0.amplitudes())?;
    let v = series_exp_apply(&theta, coeffs.y, &v)?;
    let v = series_exp_apply(&up, coeffs.x, &v)?;
    Ket::new(basis, v)
}
