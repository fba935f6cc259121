use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest basis the builders will enumerate unless told otherwise.
pub const DEFAULT_MAX_DIM: usize = 2_000_000;

/// Truncated multimode Fock basis.
///
/// States are the occupation vectors `n` with `n[m] <= cutoffs[m]` for every
/// mode and, when a total cap is set, `sum(n) <= total_cap`. They are stored in
/// lexicographic order with mode 0 most significant, so the last mode varies
/// fastest. Builders in this crate always put the phonon last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    cutoffs: Vec<u32>,
    total_cap: Option<u32>,
    occupations: Vec<u32>,
}

impl Basis {
    pub fn new(cutoffs: &[u32], total_cap: Option<u32>) -> Result<Arc<Basis>> {
        Self::with_limit(cutoffs, total_cap, DEFAULT_MAX_DIM)
    }

    pub fn with_limit(cutoffs: &[u32], total_cap: Option<u32>, max_dim: usize) -> Result<Arc<Basis>> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidBasis("mode_count must be at least 1".into()));
        }
        let size = count_states(cutoffs, total_cap);
        if size > max_dim as u128 {
            return Err(Error::DimensionOverflow {
                size: usize::try_from(size).unwrap_or(usize::MAX),
                limit: max_dim,
            });
        }
        let modes = cutoffs.len();
        let mut occupations = Vec::with_capacity(size as usize * modes);
        let mut current = vec![0u32; modes];
        enumerate(cutoffs, total_cap.map(u64::from), 0, 0, &mut current, &mut occupations);
        Ok(Arc::new(Basis {
            cutoffs: cutoffs.to_vec(),
            total_cap,
            occupations,
        }))
    }

    /// `n_pump` pump modes plus a phonon, restricted to at most `cap` total
    /// excitations. Every mode gets cutoff `cap`, so excitation-conserving
    /// operators act without truncation on this space.
    pub fn excitation_sector(n_pump: usize, cap: u32) -> Result<Arc<Basis>> {
        Self::new(&vec![cap; n_pump + 1], Some(cap))
    }

    /// Vacuum plus the `n_pump + 1` single-excitation states.
    pub fn single_excitation(n_pump: usize) -> Result<Arc<Basis>> {
        Self::excitation_sector(n_pump, 1)
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() / self.cutoffs.len()
    }

    pub fn mode_count(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[u32] {
        &self.cutoffs
    }

    pub fn total_cap(&self) -> Option<u32> {
        self.total_cap
    }

    pub fn occupation(&self, index: usize) -> &[u32] {
        let m = self.cutoffs.len();
        &self.occupations[index * m..(index + 1) * m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.occupations.chunks_exact(self.cutoffs.len())
    }

    pub fn contains(&self, occupation: &[u32]) -> bool {
        occupation.len() == self.cutoffs.len()
            && occupation.iter().zip(&self.cutoffs).all(|(n, c)| n <= c)
            && self
                .total_cap
                .is_none_or(|cap| occupation.iter().map(|&n| u64::from(n)).sum::<u64>() <= u64::from(cap))
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        if occupation.len() != self.cutoffs.len() {
            return None;
        }
        let (mut lo, mut hi) = (0, self.dim());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.occupation(mid).cmp(occupation) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Index of the state reached by shifting one excitation count of `mode`
    /// by `delta`, or `None` if the result leaves the basis.
    pub(crate) fn shifted(&self, index: usize, mode: usize, delta: i64, scratch: &mut Vec<u32>) -> Option<usize> {
        scratch.clear();
        scratch.extend_from_slice(self.occupation(index));
        let n = i64::from(scratch[mode]) + delta;
        if n < 0 || n > i64::from(self.cutoffs[mode]) {
            return None;
        }
        scratch[mode] = n as u32;
        if delta > 0 {
            if let Some(cap) = self.total_cap {
                if scratch.iter().map(|&v| u64::from(v)).sum::<u64>() > u64::from(cap) {
                    return None;
                }
            }
        }
        self.index_of(scratch)
    }

    /// True when some mode sits at its cutoff or the total cap is saturated,
    /// i.e. a raising operator could push amplitude out of the basis.
    pub fn is_edge(&self, index: usize) -> bool {
        let occ = self.occupation(index);
        occ.iter().zip(&self.cutoffs).any(|(n, c)| n == c)
            || self
                .total_cap
                .is_some_and(|cap| occ.iter().map(|&n| u64::from(n)).sum::<u64>() == u64::from(cap))
    }

    pub fn total_excitation(&self, index: usize) -> u64 {
        self.occupation(index).iter().map(|&n| u64::from(n)).sum()
    }
}

/// Builds the basis of `mode_count` modes with the given per-mode cutoffs.
pub fn build_basis(mode_count: usize, cutoffs: &[u32], total_cap: Option<u32>) -> Result<Arc<Basis>> {
    if cutoffs.len() != mode_count {
        return Err(Error::DimensionMismatch {
            expected: mode_count,
            got: cutoffs.len(),
        });
    }
    Basis::new(cutoffs, total_cap)
}

pub(crate) fn same_basis(a: &Arc<Basis>, b: &Arc<Basis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn enumerate(cutoffs: &[u32], budget: Option<u64>, mode: usize, used: u64, current: &mut [u32], out: &mut Vec<u32>) {
    if mode == cutoffs.len() {
        out.extend_from_slice(current);
        return;
    }
    let mut top = u64::from(cutoffs[mode]);
    if let Some(b) = budget {
        top = top.min(b - used);
    }
    for n in 0..=top {
        current[mode] = n as u32;
        enumerate(cutoffs, budget, mode + 1, used + n, current, out);
    }
    current[mode] = 0;
}

/// Number of occupation vectors satisfying the caps, saturating at `u128::MAX`.
fn count_states(cutoffs: &[u32], total_cap: Option<u32>) -> u128 {
    let product = cutoffs
        .iter()
        .fold(1u128, |acc, &c| acc.saturating_mul(u128::from(c) + 1));
    let sum: u64 = cutoffs.iter().map(|&c| u64::from(c)).sum();
    let cap = match total_cap {
        Some(cap) if u64::from(cap) < sum => cap as usize,
        _ => return product,
    };
    if cap.saturating_mul(cutoffs.len()) > 50_000_000 {
        // Too large to count exactly; the product is an upper bound and is
        // certainly beyond any usable limit here.
        return product;
    }
    // ways[b] = number of vectors over the modes seen so far with total exactly b.
    let mut ways = vec![0u128; cap + 1];
    ways[0] = 1;
    for &c in cutoffs {
        let mut prefix = vec![0u128; cap + 2];
        for b in 0..=cap {
            prefix[b + 1] = prefix[b].saturating_add(ways[b]);
        }
        for b in 0..=cap {
            let lo = b.saturating_sub(c as usize);
            ways[b] = prefix[b + 1].saturating_sub(prefix[lo]);
        }
    }
    ways.iter().fold(0u128, |acc, &w| acc.saturating_add(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_count(cutoffs: &[u32], cap: Option<u32>) -> usize {
        let mut count = 0;
        let total: usize = cutoffs.iter().map(|&c| c as usize + 1).product();
        for mut code in 0..total {
            let mut sum = 0;
            for &c in cutoffs.iter().rev() {
                sum += code % (c as usize + 1);
                code /= c as usize + 1;
            }
            if cap.is_none_or(|cap| sum <= cap as usize) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn qubit_pair_enumeration() {
        let b = build_basis(2, &[1, 1], None).unwrap();
        let states: Vec<_> = b.iter().map(|s| s.to_vec()).collect();
        assert_eq!(states, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn single_excitation_sector() {
        let b = build_basis(4, &[1, 1, 1, 1], Some(1)).unwrap();
        assert_eq!(b.dim(), 5);
        assert_eq!(b.occupation(0), &[0, 0, 0, 0]);
        assert_eq!(b.occupation(4), &[1, 0, 0, 0]);
    }

    #[test]
    fn capped_two_mode_count_matches_brute_force() {
        let expected = brute_force_count(&[3, 3], Some(3));
        assert_eq!(expected, 10);
        assert_eq!(build_basis(2, &[3, 3], Some(3)).unwrap().dim(), expected);
        for (cutoffs, cap) in [(vec![2, 0, 3, 1], Some(2)), (vec![4, 4, 4], Some(5)), (vec![1, 2, 3], None)] {
            assert_eq!(Basis::new(&cutoffs, cap).unwrap().dim(), brute_force_count(&cutoffs, cap));
        }
    }

    #[test]
    fn zero_caps_still_contain_vacuum() {
        let b = Basis::new(&[0, 0, 0], Some(0)).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.occupation(0), &[0, 0, 0]);
    }

    #[test]
    fn overflow_names_size() {
        let err = Basis::with_limit(&[9; 4], None, 1000).unwrap_err();
        match err {
            Error::DimensionOverflow { size, limit } => {
                assert_eq!(size, 10_000);
                assert_eq!(limit, 1000);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Basis::new(&[u32::MAX; 8], None),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn mode_count_mismatch_and_empty() {
        assert!(build_basis(3, &[1, 1], None).is_err());
        assert!(Basis::new(&[], None).is_err());
    }

    #[test]
    fn round_trip_indexing() {
        let b = Basis::new(&[2, 3, 1, 2], Some(4)).unwrap();
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.occupation(i)), Some(i));
        }
        assert_eq!(b.index_of(&[2, 3, 1, 0]), None);
        assert_eq!(b.index_of(&[0, 0]), None);
    }

    #[test]
    fn equal_parameters_give_identical_orderings() {
        let a = Basis::new(&[2, 2, 2], Some(3)).unwrap();
        let b = Basis::new(&[2, 2, 2], Some(3)).unwrap();
        assert_eq!(*a, *b);
        assert!(same_basis(&a, &b));
    }
}
