//! Matrix-free operators on the three-register space
//! `L^2(R+) x L^2(R+) x l^2`, stored as sums of Kronecker terms.
//!
//! A state vector is flattened as `v[(i*h0 + j)*l0 + k]` with `i`, `j` the
//! two radial indices and `k` the angular index. Each term applies one
//! factor per register by mode-wise contraction, so a full application costs
//! `O(h0^3 l0 + h0^2 l0)` instead of the `O(h0^4 l0)` a flattened sparse
//! matrix would need — the paper-scale truncations are only feasible this
//! way. A dense materialization path exists for small dimensions and is the
//! universal test oracle.
//!
//! Purely imaginary Hermitian operators (the charge) are held in an all-real
//! representation: the stored factors build the real antisymmetric `K` with
//! `Op = i K`, flagged by [`OperatorClass::ImaginaryAntisymmetric`]. All
//! downstream consumers need only `K` (expectations of `Op^2 = -K^2`,
//! commutators), so the entire pipeline stays in real arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::BandedMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Anything that can act on a state vector: tensor operators themselves and
/// their symmetry-sector restrictions.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> crate::error::Result<Vec<f64>>;
}

/// One register factor of a Kronecker term.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Factor {
    Identity,
    Diagonal(Vec<f64>),
    Banded(BandedMatrix),
    Dense(Matrix),
}

impl Factor {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Factor::Identity => {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            }
            Factor::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }
            Factor::Banded(b) => b.get(i, j),
            Factor::Dense(m) => m[(i, j)],
        }
    }

    fn check_dim(&self, n: usize) -> bool {
        match self {
            Factor::Identity => true,
            Factor::Diagonal(d) => d.len() == n,
            Factor::Banded(b) => b.dim() == n,
            Factor::Dense(m) => m.rows() == n && m.cols() == n,
        }
    }

    fn to_dense(&self, n: usize) -> Matrix {
        match self {
            Factor::Identity => Matrix::identity(n),
            Factor::Diagonal(d) => {
                let mut m = Matrix::zeros(n, n);
                for (i, &v) in d.iter().enumerate() {
                    m[(i, i)] = v;
                }
                m
            }
            Factor::Banded(b) => b.to_dense(),
            Factor::Dense(m) => m.clone(),
        }
    }

    fn is_identity(&self) -> bool {
        matches!(self, Factor::Identity)
    }
}

/// How the two radial factors combine:
/// `Plain`  -> left (x) right,
/// `Sym`    -> left (x) right + right (x) left,
/// `Antisym`-> left (x) right - right (x) left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PairMode {
    Plain,
    Sym,
    Antisym,
}

/// One Kronecker term `coeff * (radial pair) (x) angular`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KroneckerTerm {
    pub coeff: f64,
    pub left: Factor,
    pub right: Factor,
    pub pair: PairMode,
    pub angular: Factor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OperatorClass {
    RealSymmetric,
    /// Stored factors build the real antisymmetric K of `Op = i K`.
    ImaginaryAntisymmetric,
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TensorOperator {
    h0: usize,
    l0: usize,
    class: OperatorClass,
    terms: Vec<KroneckerTerm>,
}

impl TensorOperator {
    pub fn new(
        h0: usize,
        l0: usize,
        class: OperatorClass,
        terms: Vec<KroneckerTerm>,
    ) -> Result<Self> {
        for t in &terms {
            let ok = t.left.check_dim(h0) && t.right.check_dim(h0) && t.angular.check_dim(l0);
            if !ok {
                return Err(Error::LengthMismatch {
                    expected: h0 * h0 * l0,
                    got: 0,
                });
            }
        }
        Ok(Self {
            h0,
            l0,
            class,
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.h0 * self.h0 * self.l0
    }

    pub fn h0(&self) -> usize {
        self.h0
    }

    pub fn l0(&self) -> usize {
        self.l0
    }

    pub fn class(&self) -> OperatorClass {
        self.class
    }

    pub fn terms(&self) -> &[KroneckerTerm] {
        &self.terms
    }

    /// Matrix-free application `op * v` (for imaginary-antisymmetric
    /// operators: `K * v`). Serial and deterministic: identical inputs give
    /// bit-identical outputs.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        let mut angular_buf = vec![0.0; v.len()];
        let mut pair_buf = vec![0.0; v.len()];
        for term in &self.terms {
            // angular register first: shared by both orders of a pair
            let after_angular: &[f64] = if term.angular.is_identity() {
                v
            } else {
                angular_buf.iter_mut().for_each(|x| *x = 0.0);
                self.apply_angular(&term.angular, v, &mut angular_buf);
                &angular_buf
            };
            match term.pair {
                PairMode::Plain => {
                    self.apply_radial_pair(
                        &term.left,
                        &term.right,
                        after_angular,
                        &mut pair_buf,
                        term.coeff,
                        &mut out,
                    );
                }
                PairMode::Sym | PairMode::Antisym => {
                    let sign = if term.pair == PairMode::Sym { 1.0 } else { -1.0 };
                    self.apply_radial_pair(
                        &term.left,
                        &term.right,
                        after_angular,
                        &mut pair_buf,
                        term.coeff,
                        &mut out,
                    );
                    self.apply_radial_pair(
                        &term.right,
                        &term.left,
                        after_angular,
                        &mut pair_buf,
                        sign * term.coeff,
                        &mut out,
                    );
                }
            }
        }
        Ok(out)
    }

    /// out += coeff * (left on register 1) (right on register 2) applied to v
    fn apply_radial_pair(
        &self,
        left: &Factor,
        right: &Factor,
        v: &[f64],
        scratch: &mut [f64],
        coeff: f64,
        out: &mut [f64],
    ) {
        match (left.is_identity(), right.is_identity()) {
            (true, true) => {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    *o += coeff * x;
                }
            }
            (true, false) => {
                self.apply_register2_add(right, v, out, coeff);
            }
            (false, true) => {
                self.apply_register1_add(left, v, out, coeff);
            }
            (false, false) => {
                scratch.iter_mut().for_each(|x| *x = 0.0);
                self.apply_register2_add(right, v, scratch, 1.0);
                self.apply_register1_add(left, scratch, out, coeff);
            }
        }
    }

    /// out[..] += coeff * (F on angular register) v, blockwise over
    /// contiguous length-l0 slices.
    fn apply_angular(&self, f: &Factor, v: &[f64], out: &mut [f64]) {
        let l0 = self.l0;
        let blocks = self.h0 * self.h0;
        match f {
            Factor::Identity => out.copy_from_slice(v),
            Factor::Diagonal(d) => {
                for b in 0..blocks {
                    let base = b * l0;
                    for k in 0..l0 {
                        out[base + k] += d[k] * v[base + k];
                    }
                }
            }
            Factor::Banded(bm) => {
                for b in 0..blocks {
                    let base = b * l0;
                    for (offset, values) in bm.bands() {
                        let row0 = if *offset < 0 { (-offset) as usize } else { 0 };
                        for (t, &val) in values.iter().enumerate() {
                            let i = row0 + t;
                            let j = (i as i64 + *offset as i64) as usize;
                            out[base + i] += val * v[base + j];
                        }
                    }
                }
            }
            Factor::Dense(m) => {
                for b in 0..blocks {
                    let base = b * l0;
                    for i in 0..l0 {
                        let row = m.row(i);
                        let mut acc = 0.0;
                        for (a, x) in row.iter().zip(&v[base..base + l0]) {
                            acc += a * x;
                        }
                        out[base + i] += acc;
                    }
                }
            }
        }
    }

    /// out += coeff * (F on radial register 2) v; register-2 blocks are
    /// length-l0 slices strided h0 apart within each register-1 block.
    fn apply_register2_add(&self, f: &Factor, v: &[f64], out: &mut [f64], coeff: f64) {
        let (h0, l0) = (self.h0, self.l0);
        let block = h0 * l0;
        match f {
            Factor::Identity => {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    *o += coeff * x;
                }
            }
            Factor::Diagonal(d) => {
                for i in 0..h0 {
                    for j in 0..h0 {
                        let base = i * block + j * l0;
                        let c = coeff * d[j];
                        for k in 0..l0 {
                            out[base + k] += c * v[base + k];
                        }
                    }
                }
            }
            Factor::Banded(bm) => {
                for i in 0..h0 {
                    let ibase = i * block;
                    for (offset, values) in bm.bands() {
                        let row0 = if *offset < 0 { (-offset) as usize } else { 0 };
                        for (t, &val) in values.iter().enumerate() {
                            let jr = row0 + t;
                            let jc = (jr as i64 + *offset as i64) as usize;
                            let c = coeff * val;
                            let dst = ibase + jr * l0;
                            let src = ibase + jc * l0;
                            for k in 0..l0 {
                                out[dst + k] += c * v[src + k];
                            }
                        }
                    }
                }
            }
            Factor::Dense(m) => {
                for i in 0..h0 {
                    let ibase = i * block;
                    for jr in 0..h0 {
                        let row = m.row(jr);
                        let dst = ibase + jr * l0;
                        for (jc, &val) in row.iter().enumerate() {
                            if val == 0.0 {
                                continue;
                            }
                            let c = coeff * val;
                            let src = ibase + jc * l0;
                            for k in 0..l0 {
                                out[dst + k] += c * v[src + k];
                            }
                        }
                    }
                }
            }
        }
    }

    /// out += coeff * (F on radial register 1) v; register-1 blocks are
    /// contiguous length h0*l0 slabs.
    fn apply_register1_add(&self, f: &Factor, v: &[f64], out: &mut [f64], coeff: f64) {
        let (h0, l0) = (self.h0, self.l0);
        let block = h0 * l0;
        match f {
            Factor::Identity => {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    *o += coeff * x;
                }
            }
            Factor::Diagonal(d) => {
                for ir in 0..h0 {
                    let c = coeff * d[ir];
                    let base = ir * block;
                    for t in 0..block {
                        out[base + t] += c * v[base + t];
                    }
                }
            }
            Factor::Banded(bm) => {
                for (offset, values) in bm.bands() {
                    let row0 = if *offset < 0 { (-offset) as usize } else { 0 };
                    for (t, &val) in values.iter().enumerate() {
                        let ir = row0 + t;
                        let ic = (ir as i64 + *offset as i64) as usize;
                        let c = coeff * val;
                        let dst = ir * block;
                        let src = ic * block;
                        for s in 0..block {
                            out[dst + s] += c * v[src + s];
                        }
                    }
                }
            }
            Factor::Dense(m) => {
                for ir in 0..h0 {
                    let row = m.row(ir);
                    let dst = ir * block;
                    for (ic, &val) in row.iter().enumerate() {
                        if val == 0.0 {
                            continue;
                        }
                        let c = coeff * val;
                        let src = ic * block;
                        for s in 0..block {
                            out[dst + s] += c * v[src + s];
                        }
                    }
                }
            }
        }
    }

    /// The operator diagonal, assembled term by term from the factor
    /// diagonals (antisymmetrized pairs contribute nothing). Used as the
    /// Davidson preconditioner.
    pub fn diagonal(&self) -> Vec<f64> {
        let (h0, l0) = (self.h0, self.l0);
        let mut out = vec![0.0; self.dim()];
        let factor_diag = |f: &Factor, n: usize| -> Vec<f64> {
            (0..n).map(|i| f.get(i, i)).collect()
        };
        for term in &self.terms {
            let ld = factor_diag(&term.left, h0);
            let rd = factor_diag(&term.right, h0);
            let gd = factor_diag(&term.angular, l0);
            let combos: &[(f64, &[f64], &[f64])] = match term.pair {
                PairMode::Plain => &[(term.coeff, &ld, &rd)],
                PairMode::Sym => &[(term.coeff, &ld, &rd), (term.coeff, &rd, &ld)],
                PairMode::Antisym => &[(term.coeff, &ld, &rd), (-term.coeff, &rd, &ld)],
            };
            for &(c, f1, f2) in combos {
                for i in 0..h0 {
                    for j in 0..h0 {
                        let v = c * f1[i] * f2[j];
                        if v == 0.0 {
                            continue;
                        }
                        let base = (i * h0 + j) * l0;
                        for (k, &g) in gd.iter().enumerate() {
                            out[base + k] += v * g;
                        }
                    }
                }
            }
        }
        out
    }

    /// Matrix element between a product state and its radial-register swap,
    /// `<(j, i, l)| Op |(i, j, l)>`; with the diagonal it gives the exact
    /// diagonal of the swap-symmetrized sector restrictions.
    pub fn swap_cross_element(&self, i: usize, j: usize, l: usize) -> f64 {
        let mut acc = 0.0;
        for term in &self.terms {
            let g = term.angular.get(l, l);
            if g == 0.0 {
                continue;
            }
            let direct = term.left.get(j, i) * term.right.get(i, j);
            let swapped = term.left.get(i, j) * term.right.get(j, i);
            let v = match term.pair {
                PairMode::Plain => direct,
                PairMode::Sym => direct + swapped,
                PairMode::Antisym => direct - swapped,
            };
            acc += term.coeff * v * g;
        }
        acc
    }

    /// Dense materialization, the test oracle. Guarded by `limit` to keep
    /// accidental huge allocations out of test runs.
    pub fn materialize_dense(&self, limit: usize) -> Result<Matrix> {
        let n = self.dim();
        if n > limit {
            return Err(Error::DenseThreshold {
                dim: n,
                threshold: limit,
            });
        }
        let mut m = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e)?;
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    /// Kronecker materialization built from dense factor products — an
    /// independent route to the same matrix, used to validate `apply`.
    pub fn materialize_by_kronecker(&self, limit: usize) -> Result<Matrix> {
        let n = self.dim();
        if n > limit {
            return Err(Error::DenseThreshold {
                dim: n,
                threshold: limit,
            });
        }
        let (h0, l0) = (self.h0, self.l0);
        let mut total = Matrix::zeros(n, n);
        for term in &self.terms {
            let l = term.left.to_dense(h0);
            let r = term.right.to_dense(h0);
            let g = term.angular.to_dense(l0);
            let combos: &[(f64, &Matrix, &Matrix)] = match term.pair {
                PairMode::Plain => &[(term.coeff, &l, &r)],
                PairMode::Sym => &[(term.coeff, &l, &r), (term.coeff, &r, &l)],
                PairMode::Antisym => &[(term.coeff, &l, &r), (-term.coeff, &r, &l)],
            };
            for &(c, f1, f2) in combos {
                for i1 in 0..h0 {
                    for j1 in 0..h0 {
                        let v1 = f1[(i1, j1)];
                        if v1 == 0.0 {
                            continue;
                        }
                        for i2 in 0..h0 {
                            for j2 in 0..h0 {
                                let v12 = v1 * f2[(i2, j2)];
                                if v12 == 0.0 {
                                    continue;
                                }
                                for i3 in 0..l0 {
                                    for j3 in 0..l0 {
                                        let v = v12 * g[(i3, j3)];
                                        if v == 0.0 {
                                            continue;
                                        }
                                        let row = (i1 * h0 + i2) * l0 + i3;
                                        let col = (j1 * h0 + j2) * l0 + j3;
                                        total[(row, col)] += c * v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(total)
    }
}

impl LinearOperator for TensorOperator {
    fn dim(&self) -> usize {
        TensorOperator::dim(self)
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        TensorOperator::apply(self, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::rng::SplitMix64;

    fn random_dense(n: usize, rng: &mut SplitMix64) -> Matrix {
        Matrix::from_fn(n, n, |_, _| rng.next_gaussian_pair().0)
    }

    fn random_op(h0: usize, l0: usize, seed: u64) -> TensorOperator {
        let mut rng = SplitMix64::new(seed);
        let mut banded = BandedMatrix::new(l0);
        banded.set_band(0, (0..l0).map(|i| 0.3 + i as f64).collect());
        if l0 > 2 {
            let off: Vec<f64> = (0..l0 - 2).map(|i| 0.1 * (i as f64 + 1.0)).collect();
            banded.set_band(2, off.clone());
            banded.set_band(-2, off);
        }
        let terms = vec![
            KroneckerTerm {
                coeff: 1.25,
                left: Factor::Dense(random_dense(h0, &mut rng)),
                right: Factor::Identity,
                pair: PairMode::Sym,
                angular: Factor::Banded(banded),
            },
            KroneckerTerm {
                coeff: -0.5,
                left: Factor::Dense(random_dense(h0, &mut rng)),
                right: Factor::Dense(random_dense(h0, &mut rng)),
                pair: PairMode::Antisym,
                angular: Factor::Diagonal((0..l0).map(|i| 1.0 + i as f64).collect()),
            },
            KroneckerTerm {
                coeff: 0.75,
                left: Factor::Dense(random_dense(h0, &mut rng)),
                right: Factor::Dense(random_dense(h0, &mut rng)),
                pair: PairMode::Plain,
                angular: Factor::Identity,
            },
        ];
        TensorOperator::new(h0, l0, OperatorClass::RealSymmetric, terms).unwrap()
    }

    #[test]
    fn identity_term_leaves_vector_unchanged() {
        let op = TensorOperator::new(
            3,
            4,
            OperatorClass::RealSymmetric,
            vec![KroneckerTerm {
                coeff: 1.0,
                left: Factor::Identity,
                right: Factor::Identity,
                pair: PairMode::Plain,
                angular: Factor::Identity,
            }],
        )
        .unwrap();
        let v: Vec<f64> = (0..op.dim()).map(|i| i as f64 - 7.0).collect();
        let w = op.apply(&v).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn apply_matches_kronecker_materialization() {
        let op = random_op(3, 4, 99);
        let dense = op.materialize_by_kronecker(4096).unwrap();
        let mut rng = SplitMix64::new(17);
        for _ in 0..20 {
            let mut v = vec![0.0; op.dim()];
            rng.fill_gaussian(&mut v);
            let fast = op.apply(&v).unwrap();
            let slow = dense.matvec(&v);
            let mut diff = fast.clone();
            for (d, s) in diff.iter_mut().zip(slow.iter()) {
                *d -= s;
            }
            let rel = norm2(&diff) / norm2(&slow).max(1e-300);
            assert!(rel < 1e-12, "relative difference {rel}");
        }
    }

    #[test]
    fn materializations_agree() {
        let op = random_op(3, 3, 5);
        let a = op.materialize_dense(4096).unwrap();
        let b = op.materialize_by_kronecker(4096).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..op.dim() {
            for j in 0..op.dim() {
                worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn apply_is_linear() {
        let op = random_op(4, 3, 31);
        let mut rng = SplitMix64::new(3);
        let mut u = vec![0.0; op.dim()];
        let mut v = vec![0.0; op.dim()];
        rng.fill_gaussian(&mut u);
        rng.fill_gaussian(&mut v);
        let (a, b) = (0.7, -1.3);
        let mut combo = vec![0.0; op.dim()];
        for i in 0..op.dim() {
            combo[i] = a * u[i] + b * v[i];
        }
        let lhs = op.apply(&combo).unwrap();
        let fu = op.apply(&u).unwrap();
        let fv = op.apply(&v).unwrap();
        for i in 0..op.dim() {
            assert!((lhs[i] - a * fu[i] - b * fv[i]).abs() < 1e-12 * (1.0 + lhs[i].abs()));
        }
    }

    #[test]
    fn diagonal_and_swap_cross_match_materialization() {
        let op = random_op(3, 4, 77);
        let d = op.diagonal();
        let m = op.materialize_dense(4096).unwrap();
        for i in 0..op.dim() {
            assert!((d[i] - m[(i, i)]).abs() < 1e-12);
        }
        let (h0, l0) = (3usize, 4usize);
        for i in 0..h0 {
            for j in 0..h0 {
                for l in 0..l0 {
                    let row = (j * h0 + i) * l0 + l;
                    let col = (i * h0 + j) * l0 + l;
                    let got = op.swap_cross_element(i, j, l);
                    assert!(
                        (got - m[(row, col)]).abs() < 1e-12,
                        "cross ({i},{j},{l}): {got} vs {}",
                        m[(row, col)]
                    );
                }
            }
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let op = random_op(3, 3, 1);
        assert!(matches!(
            op.apply(&[0.0; 5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn dense_threshold_guard() {
        let op = random_op(4, 4, 2);
        assert!(matches!(
            op.materialize_dense(10),
            Err(Error::DenseThreshold { .. })
        ));
    }
}
