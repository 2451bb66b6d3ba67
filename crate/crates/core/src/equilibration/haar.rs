//! Monte Carlo statistics of Haar-random states in a micro-canonical
//! subspace: sampled as normalized vectors of independent complex Gaussians.
//! Seeds are derived per sample, so results are independent of any blocking.

use crate::math;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HaarStats {
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    /// Monte Carlo mean of `sum |c|^4` (exactly `2/(d+1)` in expectation).
    pub mean_sum4: f64,
    pub se_sum4: f64,
    /// Monte Carlo mean of `d_eff = 1/sum |c|^4`.
    pub mean_deff: f64,
    pub se_deff: f64,
    /// `(1 + d)/2`, the proved lower bound on E[d_eff].
    pub deff_bound: f64,
    pub bound_holds: bool,
}

/// Sample `samples` Haar-random unit vectors in dimension `d` and return the
/// purity and effective-dimension statistics with standard errors.
pub fn haar_microcanonical_stats(d: usize, samples: usize, seed: u64) -> HaarStats {
    assert!(d >= 1, "dimension must be >= 1");
    assert!(samples >= 2, "need at least two samples for a standard error");
    let mut mean_s = 0.0;
    let mut m2_s = 0.0;
    let mut mean_d = 0.0;
    let mut m2_d = 0.0;
    let mut count = 0.0;
    let mut gauss = alloc::vec![0.0_f64; 2 * d];
    for i in 0..samples {
        let mut rng = SplitMix64::derive(seed, i as u64);
        rng.fill_gaussian(&mut gauss);
        let mut norm2 = 0.0;
        for pair in gauss.chunks_exact(2) {
            norm2 += pair[0] * pair[0] + pair[1] * pair[1];
        }
        let mut sum4 = 0.0;
        for pair in gauss.chunks_exact(2) {
            let p = (pair[0] * pair[0] + pair[1] * pair[1]) / norm2;
            sum4 += p * p;
        }
        let deff = 1.0 / sum4;
        // Welford updates
        count += 1.0;
        let ds = sum4 - mean_s;
        mean_s += ds / count;
        m2_s += ds * (sum4 - mean_s);
        let dd = deff - mean_d;
        mean_d += dd / count;
        m2_d += dd * (deff - mean_d);
    }
    let n = samples as f64;
    let se_sum4 = math::sqrt(m2_s / (n - 1.0) / n);
    let se_deff = math::sqrt(m2_d / (n - 1.0) / n);
    let deff_bound = 0.5 * (1.0 + d as f64);
    HaarStats {
        d,
        samples,
        seed,
        mean_sum4: mean_s,
        se_sum4,
        mean_deff: mean_d,
        se_deff,
        deff_bound,
        bound_holds: mean_d >= deff_bound - 3.0 * se_deff,
    }
}
