//! Charge-sector classification and level bookkeeping.
//!
//! The Hamiltonian is real symmetric, so its computed eigenvectors are real
//! and carry no phase information about the sign of the charge; what is
//! physically recoverable is `|q|`, obtained by projecting `Q^2` (real
//! symmetric) onto each energy-degenerate cluster and diagonalizing there.
//! Opposite-charge partners appear as energy-degenerate pairs and share a
//! sector index `n`.

mod regge;

pub use regge::{
    generate_synthetic_records, regge_fit, FitRegion, ReggeFit, ReggeMode, ReggeOptions,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::EigenResult;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::math;
use crate::tensor::TensorOperator;

/// One classified eigenstate. Energies are in units of `H` (the solver works
/// on `4H`; the division by four happens here and only here).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralRecord {
    /// Energy in units of H.
    pub energy: f64,
    /// Charge magnitude: nearest even integer to sqrt(<Q^2>).
    pub q_abs: u32,
    /// Index within the |q| sector (0-based; +-q partners share n).
    pub n: u32,
    /// sqrt(<X^2 x 1 x 1 + 1 x X^2 x 1>).
    pub size: f64,
    /// |sqrt(<Q^2>) - q_abs|.
    pub q_quality: f64,
    /// Flagged by the near-degenerate-pair detector.
    pub degenerate_pair: bool,
    /// Solver residual of the underlying eigenpair (units of 4H).
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Energy clustering width, absolute, units of H.
    pub cluster_tol: f64,
    /// Charge-quality level above which a record counts as inconsistent
    /// (flagged, never dropped).
    pub reject_threshold: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-6,
            reject_threshold: 0.2,
        }
    }
}

/// Classification output: records plus the cluster-rotated eigenvectors
/// (columns), in the same order.
#[derive(Debug, Clone)]
pub struct Classified {
    pub records: Vec<SpectralRecord>,
    pub vectors: Matrix,
    /// Count of records whose q_quality exceeded the reject threshold.
    pub inconsistent: usize,
}

/// Classify eigenstates of `4H` by charge via the assembled `Q^2` operator.
pub fn classify_charge(
    eigen: &EigenResult,
    q2: &TensorOperator,
    opts: &ClassifyOptions,
) -> Result<Classified> {
    classify_by_charge_squared(
        &eigen.eigenvalues,
        &eigen.eigenvectors,
        &eigen.residuals,
        |v| q2.apply(v),
        opts,
    )
}

/// Generic classification path shared with the six-coordinate cross-check:
/// any `q2_apply` closure supplying `Q^2 v` works.
pub fn classify_by_charge_squared(
    eigenvalues: &[f64],
    eigenvectors: &Matrix,
    residuals: &[f64],
    mut q2_apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    opts: &ClassifyOptions,
) -> Result<Classified> {
    let count = eigenvalues.len();
    if count == 0 {
        return Err(Error::EmptySelection { what: "eigenpairs" });
    }
    let dim = eigenvectors.rows();
    // Q^2 applied to every vector once
    let mut q2cols: Vec<Vec<f64>> = Vec::with_capacity(count);
    for j in 0..count {
        let v = eigenvectors.col_to_vec(j);
        q2cols.push(q2_apply(&v)?);
    }
    let mut records = Vec::with_capacity(count);
    let mut vectors = Matrix::zeros(dim, count);
    let mut inconsistent = 0usize;
    // clusters are runs of eigenvalues closer than cluster_tol in H units
    let mut start = 0usize;
    while start < count {
        let mut end = start + 1;
        while end < count
            && (eigenvalues[end] - eigenvalues[end - 1]) / 4.0 < opts.cluster_tol
        {
            end += 1;
        }
        let c = end - start;
        // projected Q^2 on the cluster
        let mut proj = Matrix::zeros(c, c);
        for a in 0..c {
            let va = eigenvectors.col_to_vec(start + a);
            for b in 0..c {
                proj[(a, b)] = linalg::dot(&va, &q2cols[start + b]);
            }
        }
        // enforce exact symmetry before the solve
        for a in 0..c {
            for b in (a + 1)..c {
                let s = 0.5 * (proj[(a, b)] + proj[(b, a)]);
                proj[(a, b)] = s;
                proj[(b, a)] = s;
            }
        }
        let (mu, w) = linalg::sym_eigen(&proj)?;
        let cluster_residual = residuals[start..end]
            .iter()
            .fold(0.0_f64, |m, &r| m.max(r));
        for s in 0..c {
            let q_raw = math::sqrt(mu[s].max(0.0));
            let q_abs = (2.0 * math::round(q_raw / 2.0)).max(0.0) as u32;
            let q_quality = math::abs(q_raw - q_abs as f64);
            if q_quality > opts.reject_threshold {
                inconsistent += 1;
            }
            // rotate the cluster vectors into the Q^2 eigenbasis
            let mut rotated = vec![0.0; dim];
            for a in 0..c {
                let va = eigenvectors.col_to_vec(start + a);
                linalg::axpy(w[(a, s)], &va, &mut rotated);
            }
            vectors.set_col(start + s, &rotated);
            records.push(SpectralRecord {
                energy: eigenvalues[start + s] / 4.0,
                q_abs,
                n: 0,
                size: 0.0,
                q_quality,
                degenerate_pair: false,
                residual: cluster_residual,
            });
        }
        start = end;
    }
    Ok(Classified {
        records,
        vectors,
        inconsistent,
    })
}

/// Assign the sector index `n`: per |q|, ascending energy; for nonzero |q|,
/// one `n` per energy-degenerate +-q pair (pairs closer than `pair_tol` in
/// units of H). Deterministic under input permutations.
pub fn enumerate_levels(records: &mut [SpectralRecord], pair_tol: f64) {
    let mut sectors: Vec<u32> = records.iter().map(|r| r.q_abs).collect();
    sectors.sort_unstable();
    sectors.dedup();
    for q in sectors {
        let mut idx: Vec<usize> = (0..records.len())
            .filter(|&i| records[i].q_abs == q)
            .collect();
        idx.sort_by(|&a, &b| {
            records[a]
                .energy
                .partial_cmp(&records[b].energy)
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let mut n = 0u32;
        let mut pos = 0usize;
        while pos < idx.len() {
            records[idx[pos]].n = n;
            if q != 0
                && pos + 1 < idx.len()
                && records[idx[pos + 1]].energy - records[idx[pos]].energy <= pair_tol
            {
                records[idx[pos + 1]].n = n;
                pos += 2;
            } else {
                pos += 1;
            }
            n += 1;
        }
    }
}

/// Near-degenerate pair detection within sectors: a gap between consecutive
/// `n` levels shorter than `rel_threshold` times the mean gap over a 5-level
/// window flags both levels. Sectors with fewer than 3 levels produce no
/// flags. Returns the flagged `(q_abs, lower n)` gaps.
pub fn detect_near_degenerate_pairs(
    records: &mut [SpectralRecord],
    rel_threshold: f64,
) -> Vec<(u32, u32)> {
    let mut flagged = Vec::new();
    let mut sectors: Vec<u32> = records.iter().map(|r| r.q_abs).collect();
    sectors.sort_unstable();
    sectors.dedup();
    for q in sectors {
        // one representative energy per n
        let mut levels: Vec<(u32, f64)> = Vec::new();
        for r in records.iter().filter(|r| r.q_abs == q) {
            match levels.iter_mut().find(|(n, _)| *n == r.n) {
                Some((_, e)) => *e = 0.5 * (*e + r.energy),
                None => levels.push((r.n, r.energy)),
            }
        }
        levels.sort_by_key(|(n, _)| *n);
        if levels.len() < 3 {
            continue;
        }
        let gaps: Vec<f64> = levels
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .collect();
        for i in 0..gaps.len() {
            let lo = i.saturating_sub(2);
            let hi = (i + 3).min(gaps.len());
            let mean = gaps[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            if gaps[i] < rel_threshold * mean {
                flagged.push((q, levels[i].0));
                let (na, nb) = (levels[i].0, levels[i + 1].0);
                for r in records.iter_mut() {
                    if r.q_abs == q && (r.n == na || r.n == nb) {
                        r.degenerate_pair = true;
                    }
                }
            }
        }
    }
    flagged
}

/// `<v|S|v>^{1/2}` per eigenvector column.
pub fn size_expectations(vectors: &Matrix, size_op: &TensorOperator) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(vectors.cols());
    for j in 0..vectors.cols() {
        let v = vectors.col_to_vec(j);
        let sv = size_op.apply(&v)?;
        out.push(math::sqrt(linalg::dot(&v, &sv).max(0.0)));
    }
    Ok(out)
}

/// Options for the full classification pipeline.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub classify: ClassifyOptions,
    /// +-q pairing tolerance in units of H.
    pub pair_tol: f64,
    /// Relative gap threshold for near-degenerate pair flags.
    pub rel_threshold: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            classify: ClassifyOptions::default(),
            pair_tol: 1e-5,
            rel_threshold: 0.05,
        }
    }
}

/// classify -> enumerate -> flag pairs -> sizes, in one call.
pub fn analyze_spectrum(
    eigen: &EigenResult,
    q2: &TensorOperator,
    size_op: &TensorOperator,
    opts: &AnalysisOptions,
) -> Result<Vec<SpectralRecord>> {
    let mut classified = classify_charge(eigen, q2, &opts.classify)?;
    enumerate_levels(&mut classified.records, opts.pair_tol);
    detect_near_degenerate_pairs(&mut classified.records, opts.rel_threshold);
    let sizes = size_expectations(&classified.vectors, size_op)?;
    for (r, s) in classified.records.iter_mut().zip(sizes) {
        r.size = s;
    }
    Ok(classified.records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(q: u32, e: f64) -> SpectralRecord {
        SpectralRecord {
            energy: e,
            q_abs: q,
            n: 0,
            size: 0.0,
            q_quality: 0.0,
            degenerate_pair: false,
            residual: 0.0,
        }
    }

    #[test]
    fn enumerate_single_sector() {
        let mut recs = vec![record(0, 3.4), record(0, 1.2)];
        enumerate_levels(&mut recs, 1e-9);
        assert_eq!(recs[0].n, 1);
        assert_eq!(recs[1].n, 0);
    }

    #[test]
    fn enumerate_interleaved_sectors_independently() {
        let mut recs = vec![
            record(0, 1.0),
            record(2, 1.5),
            record(2, 1.5 + 1e-12),
            record(0, 2.0),
            record(2, 3.0),
            record(2, 3.0 + 1e-12),
        ];
        enumerate_levels(&mut recs, 1e-9);
        assert_eq!(recs[0].n, 0);
        assert_eq!(recs[3].n, 1);
        // +-q pairs share n
        assert_eq!(recs[1].n, 0);
        assert_eq!(recs[2].n, 0);
        assert_eq!(recs[4].n, 1);
        assert_eq!(recs[5].n, 1);
    }

    #[test]
    fn enumerate_is_permutation_invariant() {
        let base = vec![record(0, 1.0), record(0, 2.0), record(0, 3.0)];
        let mut a = base.clone();
        enumerate_levels(&mut a, 1e-9);
        let mut b = vec![base[2].clone(), base[0].clone(), base[1].clone()];
        enumerate_levels(&mut b, 1e-9);
        for r in &a {
            let partner = b.iter().find(|x| x.energy == r.energy).unwrap();
            assert_eq!(partner.n, r.n);
        }
    }

    #[test]
    fn adding_a_higher_state_keeps_existing_indices() {
        let mut a = vec![record(0, 1.0), record(0, 2.0)];
        enumerate_levels(&mut a, 1e-9);
        let before: Vec<u32> = a.iter().map(|r| r.n).collect();
        a.push(record(0, 9.0));
        enumerate_levels(&mut a, 1e-9);
        assert_eq!(before, a[..2].iter().map(|r| r.n).collect::<Vec<_>>());
        assert_eq!(a[2].n, 2);
    }

    #[test]
    fn equally_spaced_spectrum_has_no_flags() {
        let mut recs: Vec<SpectralRecord> =
            (0..10).map(|i| record(0, i as f64)).collect();
        enumerate_levels(&mut recs, 1e-9);
        let flags = detect_near_degenerate_pairs(&mut recs, 0.05);
        assert!(flags.is_empty());
        assert!(recs.iter().all(|r| !r.degenerate_pair));
    }

    #[test]
    fn one_collapsed_gap_is_flagged_once() {
        let mut energies: Vec<f64> = (0..10).map(|i| i as f64).collect();
        // shrink the gap between levels 4 and 5 to 1e-6 of the mean
        for e in energies.iter_mut().skip(5) {
            *e -= 1.0 - 1e-6;
        }
        let mut recs: Vec<SpectralRecord> =
            energies.iter().map(|&e| record(0, e)).collect();
        enumerate_levels(&mut recs, 1e-12);
        let flags = detect_near_degenerate_pairs(&mut recs, 0.05);
        assert_eq!(flags.len(), 1, "{flags:?}");
        assert_eq!(flags[0].0, 0);
        let flagged = recs.iter().filter(|r| r.degenerate_pair).count();
        assert_eq!(flagged, 2);
    }

    #[test]
    fn sparse_sector_produces_no_flags() {
        let mut recs = vec![record(4, 1.0), record(4, 1.0001)];
        enumerate_levels(&mut recs, 1e-9);
        let flags = detect_near_degenerate_pairs(&mut recs, 0.05);
        assert!(flags.is_empty());
    }

    #[test]
    fn classification_is_idempotent() {
        // already-labeled records re-enumerated keep their labels
        let mut recs = vec![record(0, 1.0), record(2, 1.1), record(2, 1.1 + 1e-12)];
        enumerate_levels(&mut recs, 1e-9);
        let snapshot = recs.clone();
        enumerate_levels(&mut recs, 1e-9);
        detect_near_degenerate_pairs(&mut recs, 0.05);
        assert_eq!(snapshot, recs);
    }

    #[test]
    fn size_of_identity_scaled_operator() {
        use crate::tensor::{Factor, KroneckerTerm, OperatorClass, PairMode, TensorOperator};
        let scale = 2.25;
        let op = TensorOperator::new(
            1,
            4,
            OperatorClass::RealSymmetric,
            vec![KroneckerTerm {
                coeff: scale,
                left: Factor::Identity,
                right: Factor::Identity,
                pair: PairMode::Plain,
                angular: Factor::Identity,
            }],
        )
        .unwrap();
        let mut vectors = Matrix::zeros(4, 1);
        vectors.set_col(0, &[0.5, 0.5, 0.5, 0.5]);
        let sizes = size_expectations(&vectors, &op).unwrap();
        assert!((sizes[0] - math::sqrt(scale)).abs() < 1e-14);
    }
}
