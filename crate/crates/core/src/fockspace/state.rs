use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::basis::{same_basis, Basis};
use super::sparse::SparseOp;
use crate::error::{Error, Result};

/// Behaviour shared by pure and mixed states.
pub trait QuantumState {
    fn basis(&self) -> &Arc<Basis>;

    /// Occupation probability of each basis state.
    fn populations(&self) -> Vec<f64>;

    /// `<psi|O|psi>` or `tr(O rho)`.
    fn expect(&self, op: &SparseOp) -> Result<C64>;

    /// Overlap with a pure target: `|<t|psi>|^2` or `<t|rho|t>`.
    fn overlap_with(&self, target: &Ket) -> Result<f64>;
}

/// Pure state: one complex amplitude per basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    basis: Arc<Basis>,
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(basis: &Arc<Basis>, amps: Vec<C64>) -> Result<Ket> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: amps.len(),
            });
        }
        Ok(Ket {
            basis: basis.clone(),
            amps,
        })
    }

    pub fn zeros(basis: &Arc<Basis>) -> Ket {
        Ket {
            basis: basis.clone(),
            amps: vec![C64::new(0.0, 0.0); basis.dim()],
        }
    }

    pub fn basis_state(basis: &Arc<Basis>, occupation: &[u32]) -> Result<Ket> {
        let idx = basis
            .index_of(occupation)
            .ok_or_else(|| Error::InvalidBasis(format!("occupation {occupation:?} is not in the basis")))?;
        let mut k = Self::zeros(basis);
        k.amps[idx] = C64::new(1.0, 0.0);
        Ok(k)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude_of(&self, occupation: &[u32]) -> Option<C64> {
        self.basis.index_of(occupation).map(|i| self.amps[i])
    }

    pub fn set_amplitude(&mut self, occupation: &[u32], value: C64) -> Result<()> {
        let i = self
            .basis
            .index_of(occupation)
            .ok_or_else(|| Error::InvalidBasis(format!("occupation {occupation:?} is not in the basis")))?;
        self.amps[i] = value;
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Instability {
                step: 0,
                detail: format!("cannot normalize a state of norm {n}"),
            });
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(n)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        self.check_basis(&other.basis)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scaled(&self, factor: C64) -> Ket {
        Ket {
            basis: self.basis.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: C64, other: &Ket) -> Result<Ket> {
        self.check_basis(&other.basis)?;
        Ok(Ket {
            basis: self.basis.clone(),
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + factor * b).collect(),
        })
    }

    /// L2 distance between amplitude vectors.
    pub fn distance(&self, other: &Ket) -> Result<f64> {
        self.check_basis(&other.basis)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn to_vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    pub fn to_density(&self) -> DensityOp {
        let v = self.to_vector();
        DensityOp {
            basis: self.basis.clone(),
            matrix: &v * v.adjoint(),
        }
    }

    /// Probability carried by edge states, where a raising operator would
    /// push amplitude out of the truncated basis. Bounds the truncation error.
    pub fn truncation_leakage(&self) -> f64 {
        (0..self.basis.dim())
            .filter(|&i| self.basis.is_edge(i))
            .map(|i| self.amps[i].norm_sqr())
            .sum()
    }

    fn check_basis(&self, other: &Arc<Basis>) -> Result<()> {
        if same_basis(&self.basis, other) {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }
}

impl QuantumState for Ket {
    fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn expect(&self, op: &SparseOp) -> Result<C64> {
        let applied = op.apply(self)?;
        self.inner(&applied)
    }

    fn overlap_with(&self, target: &Ket) -> Result<f64> {
        Ok(target.inner(self)?.norm_sqr())
    }
}

/// Mixed state stored as a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    basis: Arc<Basis>,
    matrix: DMatrix<C64>,
}

impl DensityOp {
    pub fn new(basis: &Arc<Basis>, matrix: DMatrix<C64>) -> Result<DensityOp> {
        let n = basis.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(DensityOp {
            basis: basis.clone(),
            matrix,
        })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.matrix.adjoint();
        self.matrix
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces the matrix with its Hermitian part.
    pub fn symmetrize(&mut self) {
        let adj = self.matrix.adjoint();
        self.matrix = (&self.matrix + adj) * C64::new(0.5, 0.0);
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut h = self.clone();
        h.symmetrize();
        h.matrix
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

impl QuantumState for DensityOp {
    fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|d| d.re).collect()
    }

    fn expect(&self, op: &SparseOp) -> Result<C64> {
        op.check_basis(&self.basis)?;
        Ok(op.triplets().map(|(r, c, v)| v * self.matrix[(c, r)]).sum())
    }

    fn overlap_with(&self, target: &Ket) -> Result<f64> {
        if !same_basis(&self.basis, target.basis()) {
            return Err(Error::BasisMismatch);
        }
        let t = target.to_vector();
        Ok((t.adjoint() * &self.matrix * &t)[(0, 0)].re)
    }
}

/// Sum of basis-state probabilities whose occupation satisfies `pattern`.
pub fn partial_probability<S, P>(state: &S, pattern: P) -> f64
where
    S: QuantumState + ?Sized,
    P: Fn(&[u32]) -> bool,
{
    let basis = state.basis();
    state
        .populations()
        .iter()
        .enumerate()
        .filter(|&(i, _)| pattern(basis.occupation(i)))
        .map(|(_, p)| p)
        .sum()
}

/// Occupation predicates used to name probability series.
#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    All,
    /// Exactly this occupation vector.
    Exact(Vec<u32>),
    /// `mode` holds exactly `count` quanta.
    Mode { mode: usize, count: u32 },
    And(Vec<Pattern>),
    Or(Vec<Pattern>),
    Not(Box<Pattern>),
}

impl Pattern {
    pub fn matches(&self, occupation: &[u32]) -> bool {
        match self {
            Pattern::All => true,
            Pattern::Exact(v) => v.as_slice() == occupation,
            Pattern::Mode { mode, count } => occupation.get(*mode) == Some(count),
            Pattern::And(ps) => ps.iter().all(|p| p.matches(occupation)),
            Pattern::Or(ps) => ps.iter().any(|p| p.matches(occupation)),
            Pattern::Not(p) => !p.matches(occupation),
        }
    }

    pub fn probability<S: QuantumState + ?Sized>(&self, state: &S) -> f64 {
        partial_probability(state, |occ| self.matches(occ))
    }

    /// A single quantum in `mode` and vacuum everywhere else.
    pub fn single(mode_count: usize, mode: usize) -> Pattern {
        let mut v = vec![0; mode_count];
        v[mode] = 1;
        Pattern::Exact(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::sparse::{lower, raise};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn normalize_gives_unit_norm() {
        let b = Basis::new(&[2, 2], None).unwrap();
        let amps = (0..b.dim()).map(|i| c(i as f64, 1.0 - i as f64 * 0.3)).collect();
        let mut k = Ket::new(&b, amps).unwrap();
        k.normalize().unwrap();
        assert!((k.norm() - 1.0).abs() < 1e-10);
        assert!(Ket::zeros(&b).normalize().is_err());
    }

    #[test]
    fn basis_mismatch_rejected() {
        let a = Basis::new(&[1, 1], None).unwrap();
        let b = Basis::new(&[2, 1], None).unwrap();
        let ka = Ket::basis_state(&a, &[1, 0]).unwrap();
        let kb = Ket::basis_state(&b, &[1, 0]).unwrap();
        assert!(matches!(ka.inner(&kb), Err(Error::BasisMismatch)));
        let op = lower(&a, 0).unwrap();
        assert!(matches!(op.apply(&kb), Err(Error::BasisMismatch)));
        assert!(matches!(kb.to_density().expect(&op), Err(Error::BasisMismatch)));
    }

    #[test]
    fn density_expectation_matches_ket() {
        let b = Basis::new(&[2, 1], None).unwrap();
        let amps = (0..b.dim()).map(|i| c(0.1 * i as f64, 0.2)).collect();
        let mut k = Ket::new(&b, amps).unwrap();
        k.normalize().unwrap();
        let op = raise(&b, 0).unwrap().matmul(&lower(&b, 1).unwrap()).unwrap();
        let rho = k.to_density();
        assert!((k.expect(&op).unwrap() - rho.expect(&op).unwrap()).norm() < 1e-14);
        assert!(rho.hermiticity_error() < 1e-15);
        assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_probability_over_partition_sums_to_one() {
        let b = Basis::new(&[2, 2, 1], Some(3)).unwrap();
        let amps = (0..b.dim()).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        let mut k = Ket::new(&b, amps).unwrap();
        k.normalize().unwrap();
        let total: f64 = (0..=2).map(|n| Pattern::Mode { mode: 0, count: n }.probability(&k)).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!((Pattern::All.probability(&k) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn w_state_mode_probability() {
        let b = Basis::single_excitation(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let mut w = Ket::zeros(&b);
        for m in 0..3 {
            let mut occ = vec![0; 4];
            occ[m] = 1;
            w.set_amplitude(&occ, c(s, 0.0)).unwrap();
        }
        let p = Pattern::Mode { mode: 0, count: 1 }.probability(&w);
        assert!((p - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn leakage_counts_edge_states() {
        let b = Basis::new(&[2], None).unwrap();
        let k = Ket::new(&b, vec![c(0.6, 0.0), c(0.0, 0.0), c(0.8, 0.0)]).unwrap();
        assert!((k.truncation_leakage() - 0.64).abs() < 1e-14);
    }
}
