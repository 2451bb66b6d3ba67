//! Singlet projection and the cross-check against the reduced model.
//!
//! Singlets are the null space of the Casimir `sum_a V_a^2 = -sum_a W_a^2`,
//! found blockwise per total-quanta level (the generators preserve quanta).
//! The Casimir spectrum is `j(j+1)` with integer `j` for these orbital-type
//! generators, so an eigenvalue cut at 0.5 is robust. A character-sum count
//! of SO(3) invariants provides the independent dimension oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::{solve_sector_decomposed, EigenRequest};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::math;
use crate::model::{assemble_4h, assemble_charge_squared, ModelSpec};
use crate::spectrum::{classify_by_charge_squared, enumerate_levels, ClassifyOptions};

use super::ops::{
    build_charge_generator, build_direct_hamiltonian, build_gauge_generators, SparseMatrix,
};
use super::{FockBasis, FockCutoff};

const CASIMIR_NULL_CUT: f64 = 0.5;

/// Orthonormal basis of the gauge-singlet subspace, as dense columns.
#[derive(Debug, Clone)]
pub struct SingletBasis {
    pub columns: Vec<Vec<f64>>,
    /// Singlet count per total-quanta level.
    pub per_level: Vec<usize>,
    /// All Casimir eigenvalues encountered (for the j(j+1) diagnostics).
    pub casimir_spectrum: Vec<f64>,
}

impl SingletBasis {
    pub fn count(&self) -> usize {
        self.columns.len()
    }

    /// max |S^T S - I|: idempotence defect of the projector `S S^T`.
    pub fn orthonormality_residual(&self) -> f64 {
        let s = self.count();
        let mut worst = 0.0_f64;
        for i in 0..s {
            for j in i..s {
                let d = linalg::dot(&self.columns[i], &self.columns[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(math::abs(d - want));
            }
        }
        worst
    }
}

/// Blockwise Casimir diagonalization and null-space extraction.
pub fn singlet_basis(basis: &FockBasis, generators: &[SparseMatrix; 3]) -> Result<SingletBasis> {
    let dim = basis.dim();
    let mut columns = Vec::new();
    let mut per_level = Vec::with_capacity(basis.blocks.len());
    let mut casimir_spectrum = Vec::new();
    for &(start, end) in &basis.blocks {
        let b = end - start;
        // dense Casimir block: -sum_a W_a^2 restricted to the level
        let mut block = Matrix::zeros(b, b);
        for w in generators {
            for j in start..end {
                // column j of W within the block
                let mut wj = vec![0.0; b];
                for &(i, v) in &w.cols[j] {
                    let i = i as usize;
                    debug_assert!(i >= start && i < end);
                    wj[i - start] = v;
                }
                // accumulate -(W^T W)_{.,j} = -(W applied twice), using
                // antisymmetry: -W^2 = W^T W
                for jj in start..end {
                    let mut acc = 0.0;
                    for &(i, v) in &w.cols[jj] {
                        acc += v * wj[i as usize - start];
                    }
                    block[(jj - start, j - start)] += acc;
                }
            }
        }
        // exact symmetry for the solver
        for i in 0..b {
            for j in (i + 1)..b {
                let s = 0.5 * (block[(i, j)] + block[(j, i)]);
                block[(i, j)] = s;
                block[(j, i)] = s;
            }
        }
        let (vals, vecs) = linalg::sym_eigen(&block)?;
        let mut level_count = 0usize;
        for (s, &lambda) in vals.iter().enumerate() {
            casimir_spectrum.push(lambda);
            if lambda < CASIMIR_NULL_CUT {
                let mut col = vec![0.0; dim];
                for i in 0..b {
                    col[start + i] = vecs[(i, s)];
                }
                columns.push(col);
                level_count += 1;
            }
        }
        per_level.push(level_count);
    }
    if columns.is_empty() {
        return Err(Error::EmptySelection { what: "singlet states" });
    }
    Ok(SingletBasis {
        columns,
        per_level,
        casimir_spectrum,
    })
}

/// SO(3)-invariant counts per total degree in `Sym^n(3 + 3)` by the
/// Molien/Newton recursion over class functions, reduced to exact cosine
/// series. The independent oracle for the singlet dimensions.
pub fn invariant_counts_by_character(n_max: u32) -> Vec<usize> {
    // class function as cosine series: f(theta) = sum_m coeff[m] cos(m theta)
    fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (m, &am) in a.iter().enumerate() {
            if am == 0.0 {
                continue;
            }
            for (n, &bn) in b.iter().enumerate() {
                if bn == 0.0 {
                    continue;
                }
                if m == 0 || n == 0 {
                    out[m + n] += am * bn;
                } else {
                    out[m + n] += 0.5 * am * bn;
                    out[m.abs_diff(n)] += 0.5 * am * bn;
                }
            }
        }
        out
    }
    // power sums p_k(theta) = chi_V(k theta) = 2 (1 + 2 cos k theta)
    let p = |k: usize| -> Vec<f64> {
        let mut v = vec![0.0; k + 1];
        v[0] = 2.0;
        v[k] += 4.0;
        v
    };
    // Newton: h_n = (1/n) sum_{k=1}^{n} p_k h_{n-k}
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(n_max as usize + 1);
    h.push(vec![1.0]);
    for n in 1..=(n_max as usize) {
        let mut acc: Vec<f64> = vec![0.0];
        for k in 1..=n {
            let term = multiply(&p(k), &h[n - k]);
            if term.len() > acc.len() {
                acc.resize(term.len(), 0.0);
            }
            for (i, t) in term.iter().enumerate() {
                acc[i] += t;
            }
        }
        for c in acc.iter_mut() {
            *c /= n as f64;
        }
        h.push(acc);
    }
    // SO(3) Haar class measure: (1/pi) int_0^pi (1 - cos theta) d theta;
    // invariant count = coeff[0] - coeff[1]/2
    h.iter()
        .map(|series| {
            let c0 = series.first().copied().unwrap_or(0.0);
            let c1 = series.get(1).copied().unwrap_or(0.0);
            math::round(c0 - 0.5 * c1) as usize
        })
        .collect()
}

/// Spectrum of `4H` projected onto the singlet subspace, with |q| labels
/// from the projected charge square.
#[derive(Debug, Clone)]
pub struct SingletSpectrum {
    /// Eigenvalues of the projected `4H` (all of them), ascending.
    pub eigenvalues_4h: Vec<f64>,
    /// Lowest-k classified levels: energies in units of H with |q| labels.
    pub levels: Vec<(f64, u32, f64)>,
    pub singlet_count: usize,
    pub per_level_counts: Vec<usize>,
    pub casimir_spectrum: Vec<f64>,
    pub projector_residual: f64,
}

/// Project, diagonalize and classify the lowest `k` singlet levels.
pub fn singlet_spectrum(cutoff: FockCutoff, k: usize) -> Result<SingletSpectrum> {
    let basis = FockBasis::new(cutoff)?;
    let h = build_direct_hamiltonian(&basis);
    let generators = build_gauge_generators(&basis);
    let w_q = build_charge_generator(&basis);
    let singlets = singlet_basis(&basis, &generators)?;
    let s = singlets.count();
    // projected H and Q^2 (s x s dense)
    let mut h_proj = Matrix::zeros(s, s);
    let mut q2_proj = Matrix::zeros(s, s);
    for j in 0..s {
        let hu = h.apply(&singlets.columns[j]);
        let wu = w_q.apply(&singlets.columns[j]);
        let q2u: Vec<f64> = {
            let wwu = w_q.apply(&wu);
            wwu.iter().map(|x| -x).collect()
        };
        for i in 0..s {
            h_proj[(i, j)] = linalg::dot(&singlets.columns[i], &hu);
            q2_proj[(i, j)] = linalg::dot(&singlets.columns[i], &q2u);
        }
    }
    for i in 0..s {
        for j in (i + 1)..s {
            let a = 0.5 * (h_proj[(i, j)] + h_proj[(j, i)]);
            h_proj[(i, j)] = a;
            h_proj[(j, i)] = a;
            let b = 0.5 * (q2_proj[(i, j)] + q2_proj[(j, i)]);
            q2_proj[(i, j)] = b;
            q2_proj[(j, i)] = b;
        }
    }
    let (vals, vecs) = linalg::sym_eigen(&h_proj)?;
    let take = k.min(s);
    let mut low_vecs = Matrix::zeros(s, take);
    for j in 0..take {
        low_vecs.set_col(j, &vecs.col_to_vec(j));
    }
    let classified = classify_by_charge_squared(
        &vals[..take],
        &low_vecs,
        &vec![0.0; take],
        |v| Ok(q2_proj.matvec(v)),
        &ClassifyOptions::default(),
    )?;
    let levels = classified
        .records
        .iter()
        .map(|r| (r.energy, r.q_abs, r.q_quality))
        .collect();
    let projector_residual = singlets.orthonormality_residual();
    Ok(SingletSpectrum {
        eigenvalues_4h: vals,
        levels,
        singlet_count: s,
        per_level_counts: singlets.per_level,
        casimir_spectrum: singlets.casimir_spectrum,
        projector_residual,
    })
}

#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossRow {
    pub level: usize,
    pub e_reduced: f64,
    pub e_direct: f64,
    pub q_reduced: u32,
    pub q_direct: u32,
    pub diff: f64,
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossCheckReport {
    pub cutoffs: Vec<u32>,
    /// Ground-state energy (units of H) per cutoff, from the direct build.
    pub ground_direct: Vec<f64>,
    pub ground_reduced: f64,
    /// Level-by-level comparison at the largest cutoff.
    pub rows: Vec<CrossRow>,
    /// |E_direct - E_reduced| of the ground state per cutoff.
    pub ground_diff: Vec<f64>,
    pub diff_nonincreasing: bool,
    pub charges_match: bool,
}

/// Compare the reduced-model spectrum with the direct six-coordinate
/// construction over a cutoff sweep.
pub fn cross_check(
    cutoffs: &[FockCutoff],
    spec: &ModelSpec,
    k: usize,
    req: &EigenRequest,
) -> Result<CrossCheckReport> {
    if cutoffs.is_empty() {
        return Err(Error::EmptySelection { what: "cutoffs" });
    }
    // reduced model: solve and classify the lowest levels
    let h = assemble_4h(spec)?;
    let q2 = assemble_charge_squared(spec)?;
    let mut solve_req = *req;
    solve_req.k = (2 * k + 4).min(h.dim() - 1);
    let eigen = solve_sector_decomposed(&h, &solve_req, None)?;
    let mut classified = classify_by_charge_squared(
        &eigen.eigenvalues,
        &eigen.eigenvectors,
        &eigen.residuals,
        |v| q2.apply(v),
        &ClassifyOptions::default(),
    )?;
    // mirror pairs split by truncation, not by solver error; merge them at a
    // physical tolerance well below the level spacing
    let pair_tol = (10.0 * req.tol / 4.0).max(8e-3);
    enumerate_levels(&mut classified.records, pair_tol);
    // one representative per (q, n), ascending energy
    let mut reduced: Vec<(f64, u32)> = Vec::new();
    for r in &classified.records {
        if !reduced
            .iter()
            .any(|(e, q)| *q == r.q_abs && math::abs(e - r.energy) < pair_tol)
        {
            reduced.push((r.energy, r.q_abs));
        }
    }
    reduced.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    reduced.truncate(k);

    let mut ground_direct = Vec::with_capacity(cutoffs.len());
    let mut ground_diff = Vec::with_capacity(cutoffs.len());
    let mut final_levels: Vec<(f64, u32, f64)> = Vec::new();
    for &cutoff in cutoffs {
        let ss = singlet_spectrum(cutoff, 2 * k + 4)?;
        // collapse +-q pairs: the direct singlet space carries one state per
        // (q, n) already (no mirror doubling in |q| labels is expected as the
        // charge eigenstates come in +-q pairs within the singlet space)
        let mut levels: Vec<(f64, u32, f64)> = Vec::new();
        for &(e, q, quality) in &ss.levels {
            if !levels
                .iter()
                .any(|(ee, qq, _)| *qq == q && math::abs(ee - e) < 1e-9)
            {
                levels.push((e, q, quality));
            }
        }
        levels.truncate(k);
        ground_direct.push(levels[0].0);
        ground_diff.push(math::abs(levels[0].0 - reduced[0].0));
        final_levels = levels;
    }
    let rows: Vec<CrossRow> = reduced
        .iter()
        .zip(final_levels.iter())
        .enumerate()
        .map(|(level, (&(er, qr), &(ed, qd, _)))| CrossRow {
            level,
            e_reduced: er,
            e_direct: ed,
            q_reduced: qr,
            q_direct: qd,
            diff: ed - er,
        })
        .collect();
    let diff_nonincreasing = ground_diff.windows(2).all(|w| w[1] <= w[0] + 5.0 * req.tol);
    let charges_match = rows.iter().all(|r| r.q_reduced == r.q_direct);
    Ok(CrossCheckReport {
        cutoffs: cutoffs.iter().map(|c| c.n_max).collect(),
        ground_direct,
        ground_reduced: reduced[0].0,
        rows,
        ground_diff,
        diff_nonincreasing,
        charges_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FockCutoff;

    #[test]
    fn character_counts_match_dot_product_ring() {
        // invariants of two vectors: polynomials in the three dot products,
        // Molien series 1/(1-t^2)^3
        let counts = invariant_counts_by_character(8);
        assert_eq!(counts, vec![1, 0, 3, 0, 6, 0, 10, 0, 15]);
    }

    #[test]
    fn singlet_dimensions_match_character_oracle() {
        let basis = FockBasis::new(FockCutoff::new(4)).unwrap();
        let generators = build_gauge_generators(&basis);
        let singlets = singlet_basis(&basis, &generators).unwrap();
        let expected = invariant_counts_by_character(4);
        assert_eq!(singlets.per_level, expected);
        assert!(singlets.orthonormality_residual() < 1e-10);
    }

    #[test]
    fn casimir_spectrum_is_j_j_plus_one() {
        let basis = FockBasis::new(FockCutoff::new(4)).unwrap();
        let generators = build_gauge_generators(&basis);
        let singlets = singlet_basis(&basis, &generators).unwrap();
        for &lambda in &singlets.casimir_spectrum {
            let j = math::round((-1.0 + math::sqrt(1.0 + 4.0 * lambda)) / 2.0);
            let want = j * (j + 1.0);
            assert!(
                math::abs(lambda - want) < 1e-8,
                "casimir eigenvalue {lambda} not of the form j(j+1)"
            );
        }
    }

    #[test]
    fn singlet_spectrum_small_cutoff() {
        let ss = singlet_spectrum(FockCutoff::new(4), 4).unwrap();
        assert_eq!(ss.singlet_count, 10); // 1 + 3 + 6
        assert!(ss.projector_residual < 1e-10);
        // variational bound from the Fock vacuum
        assert!(ss.levels[0].0 <= 1.125 + 1e-12, "ground {}", ss.levels[0].0);
        // charges are (close to) even integers
        for &(_, q, quality) in &ss.levels {
            assert_eq!(q % 2, 0);
            assert!(quality < 0.05, "quality {quality}");
        }
    }

    #[test]
    fn ground_energy_decreases_with_cutoff() {
        let e4 = singlet_spectrum(FockCutoff::new(4), 1).unwrap().levels[0].0;
        let e6 = singlet_spectrum(FockCutoff::new(6), 1).unwrap().levels[0].0;
        assert!(e6 <= e4 + 1e-12, "{e6} vs {e4}");
        assert!(e6 >= 1.05535 - 1e-6, "below the converged ground energy");
    }
}
