//! Eigenpairs of tensor operators: dense full spectra below a threshold,
//! Lanczos with full reorthogonalization for low-lying states at large
//! dimensions, and nested truncation-convergence sweeps.

mod lanczos;
mod sectors;
mod sweep;

pub use sectors::{
    solve_sector_decomposed, ParityLabel, SectorMap, SectorOperator, SymmetrySector, ALL_SECTORS,
};
pub use sweep::{extrapolate_exponential, truncation_sweep, SweepLevel, SweepResult, DEFAULT_STABILITY_TOL};

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix};
use crate::tensor::TensorOperator;

pub const DEFAULT_DENSE_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SolveMode {
    Dense,
    Lanczos,
    Auto,
}

/// Request for the `k` lowest eigenpairs.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenRequest {
    pub k: usize,
    /// Absolute residual tolerance `||op v - lambda v|| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for the random start vector.
    pub seed: u64,
    pub mode: SolveMode,
    pub dense_threshold: usize,
}

impl EigenRequest {
    pub fn lowest(k: usize) -> Self {
        Self {
            k,
            tol: 1e-8,
            max_iter: 1200,
            seed: 1,
            mode: SolveMode::Auto,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.k < 1 {
            return Err(invalid("k", "must request at least one eigenpair"));
        }
        if self.k >= dim {
            return Err(invalid("k", "k must be < operator dimension"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be > 0"));
        }
        Ok(())
    }
}

/// Eigenpairs with their convergence diagnostics. Eigenvalues ascend;
/// eigenvectors are the columns of `eigenvectors`.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: Vec<bool>,
}

impl EigenResult {
    pub fn dim(&self) -> usize {
        self.eigenvectors.rows()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Every eigenpair of the dense materialization. Only valid below the dense
/// threshold.
pub fn dense_full_spectrum(op: &TensorOperator) -> Result<EigenResult> {
    dense_full_spectrum_with_threshold(op, DEFAULT_DENSE_THRESHOLD)
}

pub fn dense_full_spectrum_with_threshold(
    op: &TensorOperator,
    threshold: usize,
) -> Result<EigenResult> {
    let dim = op.dim();
    if dim > threshold {
        return Err(Error::DenseThreshold {
            dim,
            threshold,
        });
    }
    let m = op.materialize_dense(threshold)?;
    dense_spectrum_of_matrix(&m, op)
}

/// Dense solve of an explicit symmetric matrix, with true residuals against
/// the matrix-free operator when one is supplied.
fn dense_spectrum_of_matrix(m: &Matrix, op: &TensorOperator) -> Result<EigenResult> {
    let (vals, vecs) = linalg::sym_eigen(m)?;
    let n = vals.len();
    let mut residuals = vec![0.0; n];
    for j in 0..n {
        let v = vecs.col_to_vec(j);
        let mut r = op.apply(&v)?;
        linalg::axpy(-vals[j], &v, &mut r);
        residuals[j] = linalg::norm2(&r);
    }
    Ok(EigenResult {
        converged: vec![true; n],
        eigenvalues: vals,
        eigenvectors: vecs,
        residuals,
        iterations: 0,
    })
}

/// The `k` lowest eigenpairs, routed to the dense or Lanczos path.
/// Serial-deterministic: identical `(op, req)` give bit-identical results.
pub fn lowest_eigenpairs(op: &TensorOperator, req: &EigenRequest) -> Result<EigenResult> {
    lowest_eigenpairs_from(op, req, None)
}

/// Same, but optionally seeding the Krylov start vector with a caller-built
/// guess (e.g. eigenvectors of a smaller nested truncation).
pub fn lowest_eigenpairs_from(
    op: &TensorOperator,
    req: &EigenRequest,
    start: Option<&[f64]>,
) -> Result<EigenResult> {
    let dim = op.dim();
    req.validate(dim)?;
    let use_dense = match req.mode {
        SolveMode::Dense => {
            if dim > req.dense_threshold {
                return Err(Error::DenseThreshold {
                    dim,
                    threshold: req.dense_threshold,
                });
            }
            true
        }
        SolveMode::Lanczos => false,
        SolveMode::Auto => dim <= req.dense_threshold,
    };
    if use_dense {
        let full = dense_full_spectrum_with_threshold(op, req.dense_threshold)?;
        let k = req.k;
        let mut vecs = Matrix::zeros(dim, k);
        for j in 0..k {
            let col = full.eigenvectors.col_to_vec(j);
            vecs.set_col(j, &col);
        }
        Ok(EigenResult {
            eigenvalues: full.eigenvalues[..k].to_vec(),
            eigenvectors: vecs,
            residuals: full.residuals[..k].to_vec(),
            iterations: 0,
            converged: full.converged[..k].to_vec(),
        })
    } else {
        lanczos::lanczos_lowest(op, req, start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble_4h, ModelSpec};
    use crate::tensor::{Factor, KroneckerTerm, OperatorClass, PairMode};

    fn diag_op(values: Vec<f64>) -> TensorOperator {
        let n = values.len();
        // represent as 1 x 1 x n tensor space
        TensorOperator::new(
            1,
            n,
            OperatorClass::RealSymmetric,
            vec![KroneckerTerm {
                coeff: 1.0,
                left: Factor::Identity,
                right: Factor::Identity,
                pair: PairMode::Plain,
                angular: Factor::Diagonal(values),
            }],
        )
        .unwrap()
    }

    #[test]
    fn dense_diag_is_sorted_with_permutation_vectors() {
        let op = diag_op(vec![3.0, 1.0, 2.0]);
        let r = dense_full_spectrum(&op).unwrap();
        assert_eq!(r.eigenvalues, vec![1.0, 2.0, 3.0]);
        for (j, &src) in [1usize, 2, 0].iter().enumerate() {
            assert!((r.eigenvectors[(src, j)].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_exchange_pair() {
        let op = TensorOperator::new(
            1,
            2,
            OperatorClass::RealSymmetric,
            vec![KroneckerTerm {
                coeff: 1.0,
                left: Factor::Identity,
                right: Factor::Identity,
                pair: PairMode::Plain,
                angular: Factor::Banded({
                    let mut b = crate::basis::BandedMatrix::new(2);
                    b.set_band(1, vec![1.0]);
                    b.set_band(-1, vec![1.0]);
                    b
                }),
            }],
        )
        .unwrap();
        let r = dense_full_spectrum(&op).unwrap();
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dense_eigenvectors_are_orthonormal() {
        let spec = ModelSpec::new(3, 4);
        let op = assemble_4h(&spec).unwrap();
        let r = dense_full_spectrum(&op).unwrap();
        let n = r.len();
        for i in 0..n {
            for j in i..n {
                let d = linalg::dot(
                    &r.eigenvectors.col_to_vec(i),
                    &r.eigenvectors.col_to_vec(j),
                );
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lanczos_matches_dense_small_model() {
        let spec = ModelSpec::new(6, 6);
        let op = assemble_4h(&spec).unwrap();
        let dense = dense_full_spectrum(&op).unwrap();
        let mut req = EigenRequest::lowest(10);
        req.mode = SolveMode::Lanczos;
        req.tol = 1e-9;
        let lz = lowest_eigenpairs(&op, &req).unwrap();
        assert!(lz.all_converged());
        for j in 0..10 {
            let d = (lz.eigenvalues[j] - dense.eigenvalues[j]).abs();
            assert!(d < 1e-8, "level {j}: |delta| = {d}");
        }
        // residual contract
        for j in 0..10 {
            assert!(lz.residuals[j] <= req.tol * 1.001, "residual {}", lz.residuals[j]);
        }
    }

    #[test]
    fn lanczos_is_deterministic() {
        let spec = ModelSpec::new(4, 5);
        let op = assemble_4h(&spec).unwrap();
        let mut req = EigenRequest::lowest(4);
        req.mode = SolveMode::Lanczos;
        let a = lowest_eigenpairs(&op, &req).unwrap();
        let b = lowest_eigenpairs(&op, &req).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
    }

    #[test]
    fn request_validation() {
        let spec = ModelSpec::new(3, 3);
        let op = assemble_4h(&spec).unwrap();
        let mut req = EigenRequest::lowest(0);
        assert!(lowest_eigenpairs(&op, &req).is_err());
        req.k = op.dim();
        assert!(lowest_eigenpairs(&op, &req).is_err());
    }
}
