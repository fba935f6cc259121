use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::basis::{same_basis, Basis};
use super::state::Ket;
use crate::error::{Error, Result};

/// Sparse operator on a truncated Fock basis, stored row-compressed.
///
/// Duplicate `(row, col)` entries are summed on construction and exact zeros
/// are dropped.
#[derive(Debug, Clone)]
pub struct SparseOp {
    basis: Arc<Basis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Raise,
    Lower,
}

impl SparseOp {
    pub fn from_triplets<I>(basis: &Arc<Basis>, entries: I) -> Result<SparseOp>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let dim = basis.dim();
        let mut entries: Vec<_> = entries.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.max(c) + 1,
                });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != C64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseOp {
            basis: basis.clone(),
            row_ptr,
            cols: keep_cols,
            vals: keep_vals,
        })
    }

    pub fn zero(basis: &Arc<Basis>) -> SparseOp {
        SparseOp {
            basis: basis.clone(),
            row_ptr: vec![0; basis.dim() + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(basis: &Arc<Basis>) -> SparseOp {
        Self::diagonal(basis, |_| 1.0)
    }

    pub fn diagonal(basis: &Arc<Basis>, f: impl Fn(&[u32]) -> f64) -> SparseOp {
        let entries = basis
            .iter()
            .enumerate()
            .map(|(i, occ)| (i, i, C64::new(f(occ), 0.0)));
        Self::from_triplets(basis, entries).expect("diagonal indices are in range")
    }

    /// Number operator of one mode.
    pub fn number(basis: &Arc<Basis>, mode: usize) -> Result<SparseOp> {
        check_mode(basis, mode)?;
        Ok(Self::diagonal(basis, |occ| f64::from(occ[mode])))
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[span.clone()].binary_search(&col) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `y = self * x` on raw amplitude slices.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, state: &Ket) -> Result<Ket> {
        self.check_basis(state.basis())?;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_into(state.amplitudes(), &mut out);
        Ket::new(&self.basis, out)
    }

    pub fn adjoint(&self) -> SparseOp {
        let entries = self.triplets().map(|(r, c, v)| (c, r, v.conj()));
        Self::from_triplets(&self.basis, entries).expect("transposed indices are in range")
    }

    pub fn scale(&self, factor: C64) -> SparseOp {
        let entries = self.triplets().map(|(r, c, v)| (r, c, v * factor));
        Self::from_triplets(&self.basis, entries).expect("indices unchanged")
    }

    pub fn add(&self, other: &SparseOp) -> Result<SparseOp> {
        self.check_basis(&other.basis)?;
        Self::from_triplets(&self.basis, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &SparseOp) -> Result<SparseOp> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &SparseOp) -> Result<SparseOp> {
        self.check_basis(&other.basis)?;
        let mut entries = Vec::new();
        for (r, k, a) in self.triplets() {
            for j in other.row_ptr[k]..other.row_ptr[k + 1] {
                entries.push((r, other.cols[j], a * other.vals[j]));
            }
        }
        Self::from_triplets(&self.basis, entries)
    }

    /// `[a, b] = ab - ba`.
    pub fn commutator(a: &SparseOp, b: &SparseOp) -> Result<SparseOp> {
        a.matmul(b)?.sub(&b.matmul(a)?)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// `self * rho` for a dense right operand.
    pub fn mul_dense(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, rho.ncols());
        for (r, k, v) in self.triplets() {
            for c in 0..rho.ncols() {
                out[(r, c)] += v * rho[(k, c)];
            }
        }
        out
    }

    /// `rho * self` for a dense left operand.
    pub fn dense_mul(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(rho.nrows(), n);
        for (k, c, v) in self.triplets() {
            for r in 0..rho.nrows() {
                out[(r, c)] += rho[(r, k)] * v;
            }
        }
        out
    }

    /// Largest elementwise deviation from another operator on the same basis.
    pub fn max_abs_diff(&self, other: &SparseOp) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.vals.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// `max |H - H†|` elementwise.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()).expect("same basis")
    }

    /// `max |G + G†|` elementwise.
    pub fn anti_hermiticity_error(&self) -> f64 {
        let sum = self.add(&self.adjoint()).expect("same basis");
        sum.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (largest absolute column sum).
    pub fn norm_one(&self) -> f64 {
        let mut col_sums = vec![0.0; self.dim()];
        for (_, c, v) in self.triplets() {
            col_sums[c] += v.norm();
        }
        col_sums.into_iter().fold(0.0, f64::max)
    }

    pub(crate) fn check_basis(&self, other: &Arc<Basis>) -> Result<()> {
        if same_basis(&self.basis, other) {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }
}

fn check_mode(basis: &Basis, mode: usize) -> Result<()> {
    if mode < basis.mode_count() {
        Ok(())
    } else {
        Err(Error::InvalidMode {
            mode,
            mode_count: basis.mode_count(),
        })
    }
}

/// Projector-truncated creation or annihilation operator of `mode`.
///
/// `<n-1|a|n> = sqrt(n)`; transitions that would leave the basis are dropped.
pub fn ladder(basis: &Arc<Basis>, mode: usize, kind: LadderKind) -> Result<SparseOp> {
    check_mode(basis, mode)?;
    let mut scratch = Vec::with_capacity(basis.mode_count());
    let mut entries = Vec::new();
    for i in 0..basis.dim() {
        let n = basis.occupation(i)[mode];
        match kind {
            LadderKind::Lower if n > 0 => {
                if let Some(j) = basis.shifted(i, mode, -1, &mut scratch) {
                    entries.push((j, i, C64::new(f64::from(n).sqrt(), 0.0)));
                }
            }
            LadderKind::Raise => {
                if let Some(j) = basis.shifted(i, mode, 1, &mut scratch) {
                    entries.push((j, i, C64::new(f64::from(n + 1).sqrt(), 0.0)));
                }
            }
            LadderKind::Lower => {}
        }
    }
    SparseOp::from_triplets(basis, entries)
}

/// Projector-truncated product of ladder operators, `P (f_1 f_2 ... f_k) P`.
///
/// Factors are listed left to right as written and act right to left. Unlike
/// chaining [`SparseOp::matmul`] over already-truncated factors, intermediate
/// occupations may leave the basis; only the initial and final states must lie
/// in it. This is what makes `a b†` correct on an excitation-capped basis.
pub fn product(basis: &Arc<Basis>, factors: &[(usize, LadderKind)]) -> Result<SparseOp> {
    for &(mode, _) in factors {
        check_mode(basis, mode)?;
    }
    let mut entries = Vec::new();
    let mut occ: Vec<u32> = Vec::with_capacity(basis.mode_count());
    'states: for i in 0..basis.dim() {
        occ.clear();
        occ.extend_from_slice(basis.occupation(i));
        let mut coeff = 1.0;
        for &(mode, kind) in factors.iter().rev() {
            let n = occ[mode];
            match kind {
                LadderKind::Lower => {
                    if n == 0 {
                        continue 'states;
                    }
                    coeff *= f64::from(n).sqrt();
                    occ[mode] = n - 1;
                }
                LadderKind::Raise => {
                    coeff *= f64::from(n + 1).sqrt();
                    occ[mode] = n + 1;
                }
            }
        }
        if let Some(j) = basis.index_of(&occ) {
            entries.push((j, i, C64::new(coeff, 0.0)));
        }
    }
    SparseOp::from_triplets(basis, entries)
}

pub fn lower(basis: &Arc<Basis>, mode: usize) -> Result<SparseOp> {
    ladder(basis, mode, LadderKind::Lower)
}

pub fn raise(basis: &Arc<Basis>, mode: usize) -> Result<SparseOp> {
    ladder(basis, mode, LadderKind::Raise)
}
