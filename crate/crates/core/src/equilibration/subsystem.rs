//! Subsystem equilibration on the dense path: reduced density matrices,
//! trace-norm distances, and the `d_S / sqrt(d_eff)` bound.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::eigen::EigenResult;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix};
use crate::math;

/// Which tensor slot the subsystem occupies in the flattened index:
/// `Slow` means index = s * b_dim + b, `Fast` means index = b * s_dim + s.
/// The model's angular register is the fast slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SubsystemSlot {
    Slow,
    Fast,
}

#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bipartition {
    pub s_dim: usize,
    pub b_dim: usize,
    pub slot: SubsystemSlot,
}

impl Bipartition {
    pub fn new(s_dim: usize, b_dim: usize, slot: SubsystemSlot) -> Self {
        Self { s_dim, b_dim, slot }
    }

    pub fn dim(&self) -> usize {
        self.s_dim * self.b_dim
    }

    #[inline]
    fn index(&self, s: usize, b: usize) -> usize {
        match self.slot {
            SubsystemSlot::Slow => s * self.b_dim + b,
            SubsystemSlot::Fast => b * self.s_dim + s,
        }
    }
}

/// Reduced density matrix of a pure state: `rho_S = Tr_B |psi><psi|`,
/// returned row-major `s_dim x s_dim`.
pub fn partial_trace(psi: &[Complex64], bip: &Bipartition) -> Result<Vec<Complex64>> {
    if psi.len() != bip.dim() {
        return Err(Error::LengthMismatch {
            expected: bip.dim(),
            got: psi.len(),
        });
    }
    let mut rho = vec![Complex64::new(0.0, 0.0); bip.s_dim * bip.s_dim];
    for s1 in 0..bip.s_dim {
        for s2 in 0..bip.s_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..bip.b_dim {
                acc += psi[bip.index(s1, b)] * psi[bip.index(s2, b)].conj();
            }
            rho[s1 * bip.s_dim + s2] = acc;
        }
    }
    Ok(rho)
}

fn partial_trace_real_matrix(w: &Matrix, bip: &Bipartition) -> Vec<f64> {
    let mut rho = vec![0.0; bip.s_dim * bip.s_dim];
    for s1 in 0..bip.s_dim {
        for s2 in 0..bip.s_dim {
            let mut acc = 0.0;
            for b in 0..bip.b_dim {
                acc += w[(bip.index(s1, b), bip.index(s2, b))];
            }
            rho[s1 * bip.s_dim + s2] = acc;
        }
    }
    rho
}

/// Trace norm `||M||_1 = sum |eigenvalues|` of a Hermitian matrix given
/// row-major as complex entries. Solved through the real symmetric embedding
/// `[[X, -Y], [Y, X]]`, whose spectrum doubles that of `X + iY`.
pub fn trace_norm_hermitian(m: &[Complex64], d: usize) -> Result<f64> {
    if m.len() != d * d {
        return Err(Error::LengthMismatch {
            expected: d * d,
            got: m.len(),
        });
    }
    let mut embed = Matrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let z = m[i * d + j];
            embed[(i, j)] = z.re;
            embed[(i + d, j + d)] = z.re;
            embed[(i, j + d)] = -z.im;
            embed[(i + d, j)] = z.im;
        }
    }
    let eigs = linalg::sym_eigenvalues(&embed)?;
    Ok(eigs.iter().map(|l| math::abs(*l)).sum::<f64>() / 2.0)
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubsystemReport {
    pub times: Vec<f64>,
    pub trace_distance: Vec<f64>,
    pub mean_distance: f64,
    /// `d_S / sqrt(d_eff)`.
    pub bound: f64,
    pub d_eff: f64,
    pub d_s: usize,
    pub horizon: f64,
    pub pass: bool,
}

/// Finite-horizon subsystem equilibration check on a fully solved spectrum.
/// The time average `omega` is formed blockwise over energy clusters (width
/// `cluster_tol`), which keeps it well defined in the presence of the model's
/// near-degenerate pairs; `d_eff = 1/Tr omega^2` uses the same blocks.
#[allow(clippy::too_many_arguments)]
pub fn subsystem_equilibration_check(
    eigen: &EigenResult,
    bip: &Bipartition,
    psi0: &[f64],
    horizon: f64,
    sample_times: usize,
    cluster_tol: f64,
    slack: f64,
) -> Result<SubsystemReport> {
    let dim = bip.dim();
    if eigen.dim() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: eigen.dim(),
        });
    }
    if eigen.len() < dim {
        return Err(invalid(
            "eigen",
            "subsystem check needs the full spectrum (dense path)",
        ));
    }
    if psi0.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: psi0.len(),
        });
    }
    if sample_times < 2 {
        return Err(Error::TooFewItems {
            what: "sample times",
            needed: 2,
            got: sample_times,
        });
    }
    // normalized initial state and its eigenbasis amplitudes
    let mut psi = psi0.to_vec();
    let n0 = linalg::norm2(&psi);
    if !(n0 > 0.0) {
        return Err(Error::NotNormalized { norm: 0.0 });
    }
    linalg::scale(1.0 / n0, &mut psi);
    let n_lev = eigen.len();
    let mut amps = vec![0.0; n_lev];
    for (j, a) in amps.iter_mut().enumerate() {
        *a = linalg::dot(&eigen.eigenvectors.col_to_vec(j), &psi);
    }
    // energy clusters for the block-dephased time average
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0usize;
    while start < n_lev {
        let mut end = start + 1;
        while end < n_lev && eigen.eigenvalues[end] - eigen.eigenvalues[end - 1] <= cluster_tol {
            end += 1;
        }
        clusters.push((start, end));
        start = end;
    }
    // omega = sum_c u_c u_c^T with u_c = P_c psi; d_eff = 1/sum_c ||u_c||^4
    let mut omega = Matrix::zeros(dim, dim);
    let mut purity = 0.0;
    for &(s, e) in &clusters {
        let mut u = vec![0.0; dim];
        let mut w2 = 0.0;
        for j in s..e {
            let col = eigen.eigenvectors.col_to_vec(j);
            linalg::axpy(amps[j], &col, &mut u);
            w2 += amps[j] * amps[j];
        }
        purity += w2 * w2;
        if w2 > 0.0 {
            for i in 0..dim {
                if u[i] == 0.0 {
                    continue;
                }
                for k in 0..dim {
                    omega[(i, k)] += u[i] * u[k];
                }
            }
        }
    }
    let d_eff = 1.0 / purity;
    let omega_s_real = partial_trace_real_matrix(&omega, bip);
    let omega_s: Vec<Complex64> = omega_s_real
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    // trajectory
    let mut times = Vec::with_capacity(sample_times);
    let mut distances = Vec::with_capacity(sample_times);
    let mut acc = 0.0;
    let mut psi_t = vec![Complex64::new(0.0, 0.0); dim];
    for u in 0..sample_times {
        let t = horizon * (u as f64 + 0.5) / sample_times as f64;
        for z in psi_t.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        for j in 0..n_lev {
            if amps[j] == 0.0 {
                continue;
            }
            let phase = -eigen.eigenvalues[j] * t;
            let f = Complex64::new(math::cos(phase), math::sin(phase)) * amps[j];
            let col = eigen.eigenvectors.col_to_vec(j);
            for (zi, &ci) in psi_t.iter_mut().zip(col.iter()) {
                *zi += f * ci;
            }
        }
        let mut rho_s = partial_trace(&psi_t, bip)?;
        for (r, o) in rho_s.iter_mut().zip(omega_s.iter()) {
            *r -= o;
        }
        let dist = trace_norm_hermitian(&rho_s, bip.s_dim)?;
        acc += dist;
        times.push(t);
        distances.push(dist);
    }
    let mean = acc / sample_times as f64;
    let bound = bip.s_dim as f64 / math::sqrt(d_eff);
    Ok(SubsystemReport {
        times,
        trace_distance: distances,
        mean_distance: mean,
        bound,
        d_eff,
        d_s: bip.s_dim,
        horizon,
        pass: mean <= bound * (1.0 + slack),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn eigen_from_dense(h: &Matrix) -> EigenResult {
        let (vals, vecs) = linalg::sym_eigen(h).unwrap();
        let n = vals.len();
        EigenResult {
            eigenvalues: vals,
            eigenvectors: vecs,
            residuals: vec![0.0; n],
            iterations: 0,
            converged: vec![true; n],
        }
    }

    #[test]
    fn partial_trace_preserves_trace_and_hermiticity() {
        let bip = Bipartition::new(3, 4, SubsystemSlot::Slow);
        let mut rng = SplitMix64::new(31);
        let mut psi = vec![Complex64::new(0.0, 0.0); bip.dim()];
        let mut norm = 0.0;
        for z in psi.iter_mut() {
            let (a, b) = rng.next_gaussian_pair();
            *z = Complex64::new(a, b);
            norm += z.norm_sqr();
        }
        let inv = 1.0 / math::sqrt(norm);
        for z in psi.iter_mut() {
            *z *= inv;
        }
        let rho = partial_trace(&psi, &bip).unwrap();
        let trace: Complex64 = (0..3).map(|i| rho[i * 3 + i]).sum();
        assert!((trace.re - 1.0).abs() < 1e-10);
        assert!(trace.im.abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let diff = rho[i * 3 + j] - rho[j * 3 + i].conj();
                assert!(diff.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_norm_of_known_matrix() {
        // diag(1, -2) plus an off-diagonal rotation leaves |1| + |-2| = 3
        let m = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-2.0, 0.0),
        ];
        assert!((trace_norm_hermitian(&m, 2).unwrap() - 3.0).abs() < 1e-12);
        let h = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ];
        // eigenvalues +-1
        assert!((trace_norm_hermitian(&h, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn product_eigenstate_never_moves() {
        // H = Hs x 1 + 1 x Hb (slow slot S of dim 2, bath dim 3)
        let bip = Bipartition::new(2, 3, SubsystemSlot::Slow);
        let hs = [0.3, 1.1];
        let hb = [0.0, 0.7, 1.9];
        let mut h = Matrix::zeros(6, 6);
        for s in 0..2 {
            for b in 0..3 {
                let i = s * 3 + b;
                h[(i, i)] = hs[s] + hb[b];
            }
        }
        let eigen = eigen_from_dense(&h);
        // product eigenstate: s=1, b=2 basis state
        let mut psi0 = vec![0.0; 6];
        psi0[1 * 3 + 2] = 1.0;
        let r = subsystem_equilibration_check(&eigen, &bip, &psi0, 50.0, 64, 1e-9, 0.1)
            .unwrap();
        for d in &r.trace_distance {
            assert!(*d < 1e-10, "distance {d}");
        }
        assert!(r.pass);
    }

    #[test]
    fn random_two_spin_instances_respect_bound() {
        let bip = Bipartition::new(2, 2, SubsystemSlot::Slow);
        let mut trials_passed = 0;
        for trial in 0..25u64 {
            let mut rng = SplitMix64::derive(77, trial);
            let mut h = Matrix::zeros(4, 4);
            for i in 0..4 {
                for j in 0..=i {
                    let (g, _) = rng.next_gaussian_pair();
                    h[(i, j)] = g;
                    h[(j, i)] = g;
                }
            }
            let eigen = eigen_from_dense(&h);
            let gaps_ok = eigen
                .eigenvalues
                .windows(2)
                .all(|w| w[1] - w[0] > 1e-6);
            if !gaps_ok {
                continue;
            }
            let mut psi0 = vec![0.0; 4];
            rng.fill_gaussian(&mut psi0);
            let min_gap = eigen
                .eigenvalues
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            let horizon = 1e4 / min_gap;
            let r = subsystem_equilibration_check(
                &eigen, &bip, &psi0, horizon, 400, 1e-9, 0.1,
            )
            .unwrap();
            assert!(
                r.mean_distance <= r.bound * 1.1,
                "trial {trial}: mean {} bound {}",
                r.mean_distance,
                r.bound
            );
            trials_passed += 1;
        }
        assert!(trials_passed >= 20, "only {trials_passed} usable trials");
    }

    #[test]
    fn needs_full_spectrum() {
        let bip = Bipartition::new(2, 2, SubsystemSlot::Slow);
        let h = Matrix::identity(4);
        let mut eigen = eigen_from_dense(&h);
        eigen.eigenvalues.truncate(2);
        let psi0 = [0.5, 0.5, 0.5, 0.5];
        assert!(
            subsystem_equilibration_check(&eigen, &bip, &psi0, 10.0, 8, 1e-9, 0.1).is_err()
        );
    }
}
