//! Ladder-operator assembly of the six-coordinate operators.
//!
//! Operators are composed symbolically on kets: `x = (a + a†)/sqrt 2` and
//! the antisymmetric real part `K = (a† - a)/sqrt 2` of `p = i K`. All
//! compositions run in the untruncated occupation space (intermediates above
//! the cutoff are kept) and only the final amplitudes are projected back,
//! so every stored matrix element equals the exact projection `P Op P`.
//! Everything purely imaginary is held as its real `K`-part; 4H, the
//! Casimir and `Q^2` come out real symmetric.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::math;

use super::{FockBasis, Occupation};

/// Column-compressed sparse matrix with deterministic scatter application.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub dim: usize,
    /// cols[j] = sorted (row, value) entries of column j.
    pub cols: Vec<Vec<(u32, f64)>>,
}

impl SparseMatrix {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for &(i, v) in col {
                y[i as usize] += v * xj;
            }
        }
        y
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                m[(i as usize, j)] += v;
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }
}

/// A ket as a sparse sum over occupation tuples.
type KetSum = BTreeMap<Occupation, f64>;

fn apply_x(mode: usize, ket: &KetSum) -> KetSum {
    let inv_sqrt2 = 1.0 / math::sqrt(2.0);
    let mut out = KetSum::new();
    for (occ, &amp) in ket {
        let n = occ[mode] as f64;
        if occ[mode] > 0 {
            let mut lower = *occ;
            lower[mode] -= 1;
            *out.entry(lower).or_insert(0.0) += amp * math::sqrt(n) * inv_sqrt2;
        }
        let mut upper = *occ;
        upper[mode] += 1;
        *out.entry(upper).or_insert(0.0) += amp * math::sqrt(n + 1.0) * inv_sqrt2;
    }
    out
}

/// `K = (a† - a)/sqrt 2`, the real part of `p = i K`.
fn apply_k(mode: usize, ket: &KetSum) -> KetSum {
    let inv_sqrt2 = 1.0 / math::sqrt(2.0);
    let mut out = KetSum::new();
    for (occ, &amp) in ket {
        let n = occ[mode] as f64;
        let mut upper = *occ;
        upper[mode] += 1;
        *out.entry(upper).or_insert(0.0) += amp * math::sqrt(n + 1.0) * inv_sqrt2;
        if occ[mode] > 0 {
            let mut lower = *occ;
            lower[mode] -= 1;
            *out.entry(lower).or_insert(0.0) -= amp * math::sqrt(n) * inv_sqrt2;
        }
    }
    out
}

fn add_scaled(dst: &mut KetSum, src: &KetSum, factor: f64) {
    for (occ, amp) in src {
        *dst.entry(*occ).or_insert(0.0) += amp * factor;
    }
}

/// `sum_a x_{a+off1} x_{a+off2}` applied to a ket (a dot product of
/// position vectors; off 0 selects the first vector, 3 the second).
fn apply_dot(off1: usize, off2: usize, ket: &KetSum) -> KetSum {
    let mut out = KetSum::new();
    for a in 0..3 {
        let first = apply_x(a + off2, ket);
        let second = apply_x(a + off1, &first);
        add_scaled(&mut out, &second, 1.0);
    }
    out
}

fn project_column(basis: &FockBasis, ket: &KetSum) -> Vec<(u32, f64)> {
    let mut col: Vec<(u32, f64)> = ket
        .iter()
        .filter_map(|(occ, &amp)| {
            if amp == 0.0 {
                return None;
            }
            basis.index.get(occ).map(|&i| (i, amp))
        })
        .collect();
    col.sort_unstable_by_key(|&(i, _)| i);
    col
}

fn build_from_kets(basis: &FockBasis, mut f: impl FnMut(&KetSum) -> KetSum) -> SparseMatrix {
    let mut cols = Vec::with_capacity(basis.dim());
    for occ in &basis.states {
        let mut ket = KetSum::new();
        ket.insert(*occ, 1.0);
        let image = f(&ket);
        cols.push(project_column(basis, &image));
    }
    SparseMatrix {
        dim: basis.dim(),
        cols,
    }
}

/// `4H = p1^2 + p2^2 + (x1 x x2)^2`, the quartic expanded through the
/// epsilon-tensor identity `(x1 x x2)^2 = (x1.x1)(x2.x2) - (x1.x2)^2`.
pub fn build_direct_hamiltonian(basis: &FockBasis) -> SparseMatrix {
    build_from_kets(basis, |ket| {
        let mut out = KetSum::new();
        // kinetic: p^2 = -K.K per mode
        for mode in 0..6 {
            let kk = apply_k(mode, &apply_k(mode, ket));
            add_scaled(&mut out, &kk, -1.0);
        }
        // (x1.x1)(x2.x2)
        let d2 = apply_dot(3, 3, ket);
        let d12 = apply_dot(0, 0, &d2);
        add_scaled(&mut out, &d12, 1.0);
        // -(x1.x2)^2
        let m = apply_dot(0, 3, ket);
        let mm = apply_dot(0, 3, &m);
        add_scaled(&mut out, &mm, -1.0);
        out
    })
}

/// The real antisymmetric parts `W_a` of the gauge generators
/// `V_a = i W_a = sum_i (x_i x p_i)_a`. They preserve total quanta, so the
/// cutoff never leaks the constraint.
pub fn build_gauge_generators(basis: &FockBasis) -> [SparseMatrix; 3] {
    let build = |axis: usize| {
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        build_from_kets(basis, |ket| {
            let mut out = KetSum::new();
            for offset in [0usize, 3] {
                // (x X p)_a = x_b p_c - x_c p_b ; p = iK
                let xb_kc = apply_x(b + offset, &apply_k(c + offset, ket));
                let xc_kb = apply_x(c + offset, &apply_k(b + offset, ket));
                add_scaled(&mut out, &xb_kc, 1.0);
                add_scaled(&mut out, &xc_kb, -1.0);
            }
            out
        })
    };
    [build(0), build(1), build(2)]
}

/// The real antisymmetric part `W_q` of the spatial SO(2) generator
/// `Q = i W_q = x1.p2 - x2.p1`; quanta-preserving.
pub fn build_charge_generator(basis: &FockBasis) -> SparseMatrix {
    build_from_kets(basis, |ket| {
        let mut out = KetSum::new();
        for a in 0..3 {
            let x1_k2 = apply_x(a, &apply_k(a + 3, ket));
            let x2_k1 = apply_x(a + 3, &apply_k(a, ket));
            add_scaled(&mut out, &x1_k2, 1.0);
            add_scaled(&mut out, &x2_k1, -1.0);
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::oracle::{FockBasis, FockCutoff};
    use crate::rng::SplitMix64;

    fn basis4() -> FockBasis {
        FockBasis::new(FockCutoff::new(4)).unwrap()
    }

    #[test]
    fn vacuum_expectation_of_4h() {
        let basis = basis4();
        let h = build_direct_hamiltonian(&basis);
        // <0|4H|0> = 6 * 1/2 (kinetic) + 6 * 1/4 (quartic Wick) = 4.5
        let col0 = &h.cols[0];
        let diag = col0.iter().find(|(i, _)| *i == 0).map(|(_, v)| *v).unwrap();
        assert!((diag - 4.5).abs() < 1e-12, "{diag}");
    }

    #[test]
    fn hamiltonian_is_symmetric_dense() {
        let basis = basis4();
        let h = build_direct_hamiltonian(&basis).to_dense();
        assert!(h.symmetry_residual() < 1e-12);
    }

    #[test]
    fn generators_are_antisymmetric_and_annihilate_vacuum() {
        let basis = basis4();
        let gens = build_gauge_generators(&basis);
        for w in &gens {
            let d = w.to_dense();
            assert!(d.antisymmetry_residual() < 1e-12);
        }
        let mut e0 = vec![0.0; basis.dim()];
        e0[0] = 1.0;
        for w in &gens {
            assert!(norm2(&w.apply(&e0)) < 1e-13);
        }
    }

    #[test]
    fn generators_preserve_quanta_blocks() {
        let basis = basis4();
        let gens = build_gauge_generators(&basis);
        for w in &gens {
            for (j, col) in w.cols.iter().enumerate() {
                let tj: u32 = basis.states[j].iter().map(|&n| n as u32).sum();
                for &(i, _) in col {
                    let ti: u32 = basis.states[i as usize].iter().map(|&n| n as u32).sum();
                    assert_eq!(ti, tj);
                }
            }
        }
    }

    #[test]
    fn su2_algebra_holds() {
        // V_a = i W_a with [V_a, V_b] = i eps_abc V_c <=> [W_a, W_b] = eps_abc W_c
        let basis = basis4();
        let [w1, w2, w3] = build_gauge_generators(&basis);
        let mut rng = SplitMix64::new(9);
        let mut v = vec![0.0; basis.dim()];
        rng.fill_gaussian(&mut v);
        let comm = {
            let a = w1.apply(&w2.apply(&v));
            let b = w2.apply(&w1.apply(&v));
            let c = w3.apply(&v);
            let mut r = a;
            for i in 0..r.len() {
                r[i] -= b[i] + c[i];
            }
            r
        };
        assert!(norm2(&comm) < 1e-10 * norm2(&v), "residual {}", norm2(&comm));
    }

    #[test]
    fn hamiltonian_commutes_with_generators_and_charge() {
        let basis = basis4();
        let h = build_direct_hamiltonian(&basis);
        let gens = build_gauge_generators(&basis);
        let q = build_charge_generator(&basis);
        let mut rng = SplitMix64::new(13);
        let mut v = vec![0.0; basis.dim()];
        rng.fill_gaussian(&mut v);
        let scale = norm2(&v);
        for w in gens.iter().chain(core::iter::once(&q)) {
            let a = h.apply(&w.apply(&v));
            let b = w.apply(&h.apply(&v));
            let mut r = a;
            for i in 0..r.len() {
                r[i] -= b[i];
            }
            assert!(
                norm2(&r) < 1e-10 * scale * 100.0,
                "commutator residual {}",
                norm2(&r)
            );
        }
    }

    #[test]
    fn charge_preserves_quanta() {
        let basis = basis4();
        let q = build_charge_generator(&basis);
        for (j, col) in q.cols.iter().enumerate() {
            let tj: u32 = basis.states[j].iter().map(|&n| n as u32).sum();
            for &(i, _) in col {
                let ti: u32 = basis.states[i as usize].iter().map(|&n| n as u32).sum();
                assert_eq!(ti, tj);
            }
        }
    }
}
