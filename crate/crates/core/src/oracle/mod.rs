//! Independent brute-force construction in the original six coordinates:
//! the Hamiltonian `4H = p1^2 + p2^2 + (x1 cross x2)^2` on a total-quanta
//! Fock basis of six unit-frequency oscillators, the gauge generators
//! `V_a = sum_i (x_i cross p_i)_a`, the singlet projection through the
//! Casimir null space, and the spectrum cross-check against the reduced
//! three-register model.
//!
//! Cutting on total quanta (never per mode) keeps the generators exactly
//! block-preserved, so the singlet constraint holds exactly at every cutoff
//! and projected eigenvalues are variational upper bounds.

mod ops;
mod singlet;

pub use ops::{
    build_charge_generator, build_direct_hamiltonian, build_gauge_generators, SparseMatrix,
};
pub use singlet::{
    cross_check, invariant_counts_by_character, singlet_basis, singlet_spectrum, CrossCheckReport,
    CrossRow, SingletBasis, SingletSpectrum,
};

use alloc::vec::Vec;

use alloc::collections::BTreeMap;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_FOCK_BUDGET: usize = 20_000;

/// Occupation numbers of the six modes `(a, i)`, flattened as
/// `mode = 3*i + a` (modes 0..2 the first vector, 3..5 the second).
pub type Occupation = [u8; 6];

/// Total-quanta cutoff `sum n_m <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FockCutoff {
    pub n_max: u32,
}

impl FockCutoff {
    pub fn new(n_max: u32) -> Self {
        Self { n_max }
    }

    /// `C(n_max + 6, 6)`.
    pub fn dimension(&self) -> usize {
        let n = self.n_max as u64;
        let mut acc = 1u64;
        for k in 1..=6u64 {
            acc = acc * (n + k) / k;
        }
        acc as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(invalid("n_max", "must be >= 2"));
        }
        if self.dimension() > DEFAULT_FOCK_BUDGET {
            return Err(Error::DimensionBudget {
                dim: self.dimension(),
                budget: DEFAULT_FOCK_BUDGET,
            });
        }
        Ok(())
    }
}

/// The enumerated basis, sorted by total quanta then lexicographically,
/// with the block ranges per quanta level.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub cutoff: FockCutoff,
    pub states: Vec<Occupation>,
    pub index: BTreeMap<Occupation, u32>,
    /// Half-open index ranges per total-quanta level 0..=n_max.
    pub blocks: Vec<(usize, usize)>,
}

impl FockBasis {
    pub fn new(cutoff: FockCutoff) -> Result<Self> {
        cutoff.validate()?;
        let mut states = Vec::with_capacity(cutoff.dimension());
        let mut blocks = Vec::with_capacity(cutoff.n_max as usize + 1);
        for total in 0..=cutoff.n_max {
            let start = states.len();
            enumerate_level(total, &mut states);
            blocks.push((start, states.len()));
        }
        let mut index = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            index.insert(*s, i as u32);
        }
        debug_assert_eq!(states.len(), cutoff.dimension());
        Ok(Self {
            cutoff,
            states,
            index,
            blocks,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }
}

/// All occupation tuples with the given total, in lexicographic order.
fn enumerate_level(total: u32, out: &mut Vec<Occupation>) {
    fn recurse(mode: usize, remaining: u32, current: &mut Occupation, out: &mut Vec<Occupation>) {
        if mode == 5 {
            current[5] = remaining as u8;
            out.push(*current);
            return;
        }
        for n in 0..=remaining {
            current[mode] = n as u8;
            recurse(mode + 1, remaining - n, current, out);
        }
        current[mode] = 0;
    }
    let mut current = [0u8; 6];
    recurse(0, total, &mut current, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_formula() {
        assert_eq!(FockCutoff::new(2).dimension(), 28);
        assert_eq!(FockCutoff::new(4).dimension(), 210);
        assert_eq!(FockCutoff::new(8).dimension(), 3003);
    }

    #[test]
    fn basis_is_complete_and_indexed() {
        let basis = FockBasis::new(FockCutoff::new(4)).unwrap();
        assert_eq!(basis.dim(), 210);
        for (i, s) in basis.states.iter().enumerate() {
            assert_eq!(basis.index[s], i as u32);
            let total: u32 = s.iter().map(|&n| n as u32).sum();
            assert!(total <= 4);
        }
        // block ranges partition the basis by total quanta
        let mut covered = 0;
        for (level, (a, b)) in basis.blocks.iter().enumerate() {
            assert_eq!(*a, covered);
            for s in &basis.states[*a..*b] {
                let total: u32 = s.iter().map(|&n| n as u32).sum();
                assert_eq!(total as usize, level);
            }
            covered = *b;
        }
        assert_eq!(covered, basis.dim());
    }

    #[test]
    fn tiny_cutoff_is_rejected() {
        assert!(FockCutoff::new(1).validate().is_err());
    }
}
