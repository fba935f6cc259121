use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::expm::{dense_expm, krylov_expv};
use crate::error::{Error, Result};
use crate::fockspace::{same_basis, Ket, SparseOp};

/// Bases up to this size are propagated with a dense exponential.
pub const DENSE_LIMIT: usize = 2000;

const KRYLOV_DIM: usize = 30;
const KRYLOV_TOL: f64 = 1e-13;

/// `exp(generator) psi`, dense for small bases and Krylov above [`DENSE_LIMIT`].
pub fn exp_apply(generator: &SparseOp, psi: &Ket) -> Result<Ket> {
    scaled_exp_apply(generator, C64::new(1.0, 0.0), psi)
}

fn scaled_exp_apply(op: &SparseOp, t: C64, psi: &Ket) -> Result<Ket> {
    let amps = if op.dim() <= DENSE_LIMIT {
        let u = dense_expm(&(op.to_dense() * t));
        (u * DVector::from_column_slice(psi.amplitudes())).iter().copied().collect()
    } else {
        krylov_expv(op, t, psi.amplitudes(), KRYLOV_DIM, KRYLOV_TOL)?
    };
    if amps.iter().any(|a: &C64| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::Instability {
            step: 0,
            detail: format!("non-finite amplitude after exponentiating a {}-state operator", op.dim()),
        });
    }
    Ket::new(psi.basis(), amps)
}

/// Brute-force propagation `exp(-i H gt) psi0` for `H` in units of `ħg`.
pub fn evolve_exact(h: &SparseOp, psi0: &Ket, gt: f64) -> Result<Ket> {
    if !same_basis(psi0.basis(), h.basis()) {
        return Err(Error::BasisMismatch);
    }
    if gt == 0.0 {
        return Ok(psi0.clone());
    }
    scaled_exp_apply(h, C64::new(0.0, -gt), psi0)
}
