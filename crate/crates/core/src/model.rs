//! Assembly of the model operators: the Hamiltonian `4H`, the conserved
//! charge `Q` (and its square), and the size observable, as
//! [`TensorOperator`]s over the truncated three-register space.
//!
//! `4H = (P^2 x 1 + 1 x P^2) x 1
//!     + (X^-2 x 1 + 1 x X^-2) x diag(l(l+1))
//!     + X^2 x X^2 x A`
//!
//! `Q  = (X x P - P x X) x Q_p + (X x X^-1 - X^-1 x X) x Q_x`
//!
//! Physical energies are eigenvalues of this `4H` divided by four; the
//! division happens once, in spectrum classification, never here.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{
    a_matrix, angular_momentum_diagonal, charge_bands, radial_operator_matrix, AngularSpec,
    BandedMatrix, RadialBasisSpec, RadialMatrix, RadialOperatorKind,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::tensor::{Factor, KroneckerTerm, OperatorClass, PairMode, TensorOperator};

pub const DEFAULT_DIMENSION_BUDGET: usize = 4_000_000;

/// Full model truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub radial: RadialBasisSpec,
    pub angular: AngularSpec,
    /// Hard cap on `h0^2 * l0`.
    pub max_dim: usize,
}

impl ModelSpec {
    pub fn new(h0: usize, l0: usize) -> Self {
        Self {
            radial: RadialBasisSpec::new(h0),
            angular: AngularSpec::new(l0),
            max_dim: DEFAULT_DIMENSION_BUDGET,
        }
    }

    pub fn dim(&self) -> usize {
        self.radial.h0 * self.radial.h0 * self.angular.l0
    }

    pub fn h0(&self) -> usize {
        self.radial.h0
    }

    pub fn l0(&self) -> usize {
        self.angular.l0
    }

    pub fn validate(&self) -> Result<()> {
        self.radial.validate()?;
        self.angular.validate()?;
        if self.dim() < 8 {
            return Err(invalid("model", "total dimension h0^2*l0 must be >= 8"));
        }
        if self.dim() > self.max_dim {
            return Err(Error::DimensionBudget {
                dim: self.dim(),
                budget: self.max_dim,
            });
        }
        Ok(())
    }
}

fn radial_factor(kind: RadialOperatorKind, spec: &RadialBasisSpec) -> Result<Factor> {
    Ok(match radial_operator_matrix(kind, spec)? {
        RadialMatrix::Banded(b) => Factor::Banded(b),
        RadialMatrix::Dense(m) => Factor::Dense(m),
    })
}

/// The Hamiltonian `4H` as three Kronecker terms (kinetic, centrifugal,
/// quartic). Real symmetric; couples only even-to-even and odd-to-odd `l`.
pub fn assemble_4h(spec: &ModelSpec) -> Result<TensorOperator> {
    spec.validate()?;
    let p2 = radial_factor(RadialOperatorKind::PSquared, &spec.radial)?;
    let xm2 = radial_factor(RadialOperatorKind::XInvSquared, &spec.radial)?;
    let x2 = radial_factor(RadialOperatorKind::XSquared, &spec.radial)?;
    let centrifugal = angular_momentum_diagonal(&spec.angular)?;
    let a = a_matrix(&spec.angular)?;
    let terms = vec![
        KroneckerTerm {
            coeff: 1.0,
            left: p2,
            right: Factor::Identity,
            pair: PairMode::Sym,
            angular: Factor::Identity,
        },
        KroneckerTerm {
            coeff: 1.0,
            left: xm2,
            right: Factor::Identity,
            pair: PairMode::Sym,
            angular: Factor::Diagonal(centrifugal),
        },
        KroneckerTerm {
            coeff: 1.0,
            left: x2.clone(),
            right: x2,
            pair: PairMode::Plain,
            angular: Factor::Banded(a),
        },
    ];
    TensorOperator::new(spec.h0(), spec.l0(), OperatorClass::RealSymmetric, terms)
}

/// The charge `Q = i K` in its real antisymmetric representation `K`:
/// two antisymmetrized Kronecker terms.
pub fn assemble_charge(spec: &ModelSpec) -> Result<TensorOperator> {
    spec.validate()?;
    let x = radial_factor(RadialOperatorKind::X, &spec.radial)?;
    let k_p = radial_factor(RadialOperatorKind::P, &spec.radial)?;
    let x_inv = radial_factor(RadialOperatorKind::XInv, &spec.radial)?;
    let (q_p, q_x) = charge_bands(&spec.angular)?;
    // X x P - P x X = i (X x K_p - K_p x X); (X x X^-1 - X^-1 x X) x (i C).
    let terms = vec![
        KroneckerTerm {
            coeff: 1.0,
            left: x.clone(),
            right: k_p,
            pair: PairMode::Antisym,
            angular: Factor::Banded(q_p),
        },
        KroneckerTerm {
            coeff: 1.0,
            left: x,
            right: x_inv,
            pair: PairMode::Antisym,
            angular: Factor::Banded(q_x),
        },
    ];
    TensorOperator::new(
        spec.h0(),
        spec.l0(),
        OperatorClass::ImaginaryAntisymmetric,
        terms,
    )
}

/// `Q^2 = -K^2`, expanded symbolically into plain Kronecker terms with real
/// factor products, so it stays inside the real-symmetric solver path.
pub fn assemble_charge_squared(spec: &ModelSpec) -> Result<TensorOperator> {
    spec.validate()?;
    let x = radial_operator_matrix(RadialOperatorKind::X, &spec.radial)?.to_dense();
    let k_p = radial_operator_matrix(RadialOperatorKind::P, &spec.radial)?.to_dense();
    let x_inv = radial_operator_matrix(RadialOperatorKind::XInv, &spec.radial)?.to_dense();
    let (q_p, q_x) = charge_bands(&spec.angular)?;

    // K = sum_a s_a L_a x R_a x G_a over the four expanded triples.
    struct Triple<'a> {
        sign: f64,
        left: &'a Matrix,
        right: &'a Matrix,
        angular: &'a BandedMatrix,
    }
    let triples = [
        Triple {
            sign: 1.0,
            left: &x,
            right: &k_p,
            angular: &q_p,
        },
        Triple {
            sign: -1.0,
            left: &k_p,
            right: &x,
            angular: &q_p,
        },
        Triple {
            sign: 1.0,
            left: &x,
            right: &x_inv,
            angular: &q_x,
        },
        Triple {
            sign: -1.0,
            left: &x_inv,
            right: &x,
            angular: &q_x,
        },
    ];
    let mut terms = Vec::with_capacity(16);
    for ta in &triples {
        for tb in &triples {
            let left = ta.left.mat_mul(tb.left);
            let right = ta.right.mat_mul(tb.right);
            let angular = ta.angular.mat_mul(tb.angular);
            terms.push(KroneckerTerm {
                // Q^2 = -K^2
                coeff: -ta.sign * tb.sign,
                left: Factor::Dense(left),
                right: Factor::Dense(right),
                pair: PairMode::Plain,
                angular: Factor::Banded(angular),
            });
        }
    }
    TensorOperator::new(spec.h0(), spec.l0(), OperatorClass::RealSymmetric, terms)
}

/// The size observable `X^2 x 1 x 1 + 1 x X^2 x 1`.
pub fn size_operator(spec: &ModelSpec) -> Result<TensorOperator> {
    spec.validate()?;
    let x2 = radial_factor(RadialOperatorKind::XSquared, &spec.radial)?;
    let terms = vec![KroneckerTerm {
        coeff: 1.0,
        left: x2,
        right: Factor::Identity,
        pair: PairMode::Sym,
        angular: Factor::Identity,
    }];
    TensorOperator::new(spec.h0(), spec.l0(), OperatorClass::RealSymmetric, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, sym_eigenvalues};
    use crate::rng::SplitMix64;

    #[test]
    fn dimension_is_h0_squared_l0() {
        let spec = ModelSpec::new(4, 4);
        let h = assemble_4h(&spec).unwrap();
        assert_eq!(h.dim(), 64);
        assert_eq!(h.terms().len(), 3);
    }

    #[test]
    fn four_h_is_symmetric_dense() {
        let spec = ModelSpec::new(4, 4);
        let h = assemble_4h(&spec).unwrap();
        let m = h.materialize_dense(4096).unwrap();
        assert!(m.symmetry_residual() < 1e-12);
    }

    #[test]
    fn four_h_spectrum_bounded_below_and_variational() {
        let spec = ModelSpec::new(4, 4);
        let m = assemble_4h(&spec).unwrap().materialize_dense(4096).unwrap();
        let eigs = sym_eigenvalues(&m).unwrap();
        assert!(eigs[0] >= 0.0, "4H must be PSD, got {}", eigs[0]);
        // Fock-vacuum variational bound: E_GS <= 1.125, i.e. lambda <= 4.5
        assert!(eigs[0] <= 4.5, "variational bound violated: {}", eigs[0]);
    }

    #[test]
    fn four_h_decouples_l_parity() {
        let spec = ModelSpec::new(3, 5);
        let h = assemble_4h(&spec).unwrap();
        let m = h.materialize_dense(4096).unwrap();
        let l0 = 5;
        for row in 0..h.dim() {
            for col in 0..h.dim() {
                if (row % l0) % 2 != (col % l0) % 2 {
                    assert_eq!(m[(row, col)], 0.0, "parity coupling at ({row},{col})");
                }
            }
        }
        // parity of the support is preserved by application
        let mut v = vec![0.0; h.dim()];
        for idx in 0..h.dim() {
            if (idx % l0) % 2 == 0 {
                v[idx] = 1.0 + idx as f64 * 0.01;
            }
        }
        let w = h.apply(&v).unwrap();
        for (idx, val) in w.iter().enumerate() {
            if (idx % l0) % 2 == 1 {
                assert_eq!(*val, 0.0);
            }
        }
    }

    #[test]
    fn charge_is_imaginary_hermitian() {
        let spec = ModelSpec::new(4, 4);
        let q = assemble_charge(&spec).unwrap();
        assert_eq!(q.class(), OperatorClass::ImaginaryAntisymmetric);
        let k = q.materialize_dense(4096).unwrap();
        // Q = iK Hermitian <=> K antisymmetric
        assert!(k.antisymmetry_residual() < 1e-12);
    }

    #[test]
    fn charge_expectation_vanishes_on_real_vectors() {
        let spec = ModelSpec::new(3, 4);
        let q = assemble_charge(&spec).unwrap();
        let mut rng = SplitMix64::new(8);
        for _ in 0..5 {
            let mut v = vec![0.0; q.dim()];
            rng.fill_gaussian(&mut v);
            let kv = q.apply(&v).unwrap();
            // <v|Q|v> = i v.Kv; for antisymmetric K the real quadratic form is 0
            let form: f64 = v.iter().zip(kv.iter()).map(|(a, b)| a * b).sum();
            assert!(form.abs() < 1e-10 * norm2(&v) * norm2(&kv).max(1.0));
        }
    }

    #[test]
    fn charge_squared_matches_double_application() {
        let spec = ModelSpec::new(4, 4);
        let q = assemble_charge(&spec).unwrap();
        let q2 = assemble_charge_squared(&spec).unwrap();
        let mut rng = SplitMix64::new(21);
        let mut v = vec![0.0; q.dim()];
        rng.fill_gaussian(&mut v);
        let kv = q.apply(&v).unwrap();
        let kkv = q.apply(&kv).unwrap();
        let direct = q2.apply(&v).unwrap();
        let mut diff = 0.0_f64;
        for i in 0..v.len() {
            // Q^2 = -K^2
            diff = diff.max((direct[i] + kkv[i]).abs());
        }
        assert!(diff < 1e-10, "max |Q^2 v - Q(Qv)| = {diff}");
    }

    #[test]
    fn charge_squared_is_positive_semidefinite() {
        let spec = ModelSpec::new(4, 4);
        let q2 = assemble_charge_squared(&spec).unwrap();
        let m = q2.materialize_dense(4096).unwrap();
        assert!(m.symmetry_residual() < 1e-12);
        let eigs = sym_eigenvalues(&m).unwrap();
        assert!(eigs[0] >= -1e-10, "min eigenvalue {}", eigs[0]);
    }

    #[test]
    fn size_operator_is_positive_definite_and_swap_symmetric() {
        let spec = ModelSpec::new(4, 4);
        let s = size_operator(&spec).unwrap();
        let m = s.materialize_dense(4096).unwrap();
        assert!(m.symmetry_residual() < 1e-12);
        let eigs = sym_eigenvalues(&m).unwrap();
        assert!(eigs[0] > 0.0);
        // swap the two radial registers of a random vector: expectation invariant
        let (h0, l0) = (4usize, 4usize);
        let mut rng = SplitMix64::new(4);
        let mut v = vec![0.0; s.dim()];
        rng.fill_gaussian(&mut v);
        let mut swapped = vec![0.0; s.dim()];
        for i in 0..h0 {
            for j in 0..h0 {
                for k in 0..l0 {
                    swapped[(j * h0 + i) * l0 + k] = v[(i * h0 + j) * l0 + k];
                }
            }
        }
        let sv = s.apply(&v).unwrap();
        let ssw = s.apply(&swapped).unwrap();
        let e1: f64 = v.iter().zip(sv.iter()).map(|(a, b)| a * b).sum();
        let e2: f64 = swapped.iter().zip(ssw.iter()).map(|(a, b)| a * b).sum();
        assert!((e1 - e2).abs() < 1e-10 * e1.abs());
    }

    #[test]
    fn budget_is_enforced() {
        let mut spec = ModelSpec::new(16, 16);
        spec.max_dim = 100;
        assert!(matches!(
            assemble_4h(&spec),
            Err(Error::DimensionBudget { .. })
        ));
    }

    #[test]
    fn invalid_l0_names_the_field() {
        let spec = ModelSpec::new(4, 1);
        match assemble_4h(&spec) {
            Err(Error::InvalidSpec { field, .. }) => assert_eq!(field, "l0"),
            other => panic!("expected InvalidSpec, got {other:?}"),
        }
    }
}
