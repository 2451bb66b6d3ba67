//! Slow-observable trajectories and the generic observable dephasing bound.
//!
//! The slow observable is nearest-neighbor hopping on a micro-canonical
//! window, started from the uniform superposition. Its deviation from the
//! time average is exactly `(2/d) |sum_i cos(g_i t)|` with `g_i` the window
//! gaps, normalized here by the exact path-graph operator norm
//! `2 cos(pi/(d+1))`. The certified lower-bound series is the cosine sum
//! itself over `d`; the quadratic curve `1 - sum g_i^2 t^2 / (2d)` is
//! reported alongside for comparison (it bounds the cosine sum from below
//! termwise but evaluates to 1 at t = 0 under its loose `||O|| <= 2`
//! normalization, while the cosine form starts at `(d-1)/d`).

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix};
use crate::math;

use super::{effective_dimension, AmplitudeVector, MicrocanonicalWindow};

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryReport {
    pub d_delta: usize,
    pub gaps: Vec<f64>,
    /// Exact operator norm of the hopping observable, `2 cos(pi/(d+1))`.
    pub operator_norm: f64,
    pub times: Vec<f64>,
    /// `|Tr O (rho(t) - omega)| / ||O||` with the exact norm.
    pub exact_deviation: Vec<f64>,
    /// Same deviation normalized by the loose bound `||O|| <= 2`.
    pub deviation_loose_norm: Vec<f64>,
    /// Certified lower bound `(1/d) sum_i cos(g_i t)`.
    pub certified_bound: Vec<f64>,
    /// Quadratic curve `1 - sum_i g_i^2 t^2 / (2d)`.
    pub quadratic_bound: Vec<f64>,
}

/// Deviation trajectory of the hopping observable on a window, from the
/// uniform initial state. Needs `d_Delta >= 2`.
pub fn slow_observable_trajectory(
    window: &MicrocanonicalWindow,
    t_grid: &[f64],
) -> Result<TrajectoryReport> {
    let d = window.d_delta();
    if d < 2 {
        return Err(Error::TooFewItems {
            what: "window levels",
            needed: 2,
            got: d,
        });
    }
    if t_grid.is_empty() {
        return Err(Error::EmptySelection { what: "time grid" });
    }
    let gaps: Vec<f64> = window.energies.windows(2).map(|w| w[1] - w[0]).collect();
    let df = d as f64;
    let operator_norm = 2.0 * math::cos(math::PI / (df + 1.0));
    let gap_sq_sum: f64 = gaps.iter().map(|g| g * g).sum();
    let mut exact = Vec::with_capacity(t_grid.len());
    let mut loose = Vec::with_capacity(t_grid.len());
    let mut certified = Vec::with_capacity(t_grid.len());
    let mut quadratic = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let s: f64 = gaps.iter().map(|&g| math::cos(g * t)).sum();
        exact.push(2.0 * math::abs(s) / df / operator_norm);
        loose.push(math::abs(s) / df);
        certified.push(s / df);
        quadratic.push(1.0 - gap_sq_sum * t * t / (2.0 * df));
    }
    Ok(TrajectoryReport {
        d_delta: d,
        gaps,
        operator_norm,
        times: t_grid.to_vec(),
        exact_deviation: exact,
        deviation_loose_norm: loose,
        certified_bound: certified,
        quadratic_bound: quadratic,
    })
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservableReport {
    pub times: Vec<f64>,
    pub deviation: Vec<f64>,
    /// Finite-horizon mean of the squared deviation.
    pub mean_sq_deviation: f64,
    /// `||A||^2 / d_eff`.
    pub bound: f64,
    pub d_eff: f64,
    pub operator_norm: f64,
    pub min_gap: f64,
    pub horizon: f64,
    pub pass: bool,
}

/// Finite-horizon check of the dephasing bound
/// `time-avg |Tr rho(t) A - Tr omega A|^2 <= ||A||^2 / d_eff` for an
/// observable given in the eigenbasis of the listed levels. Energies must be
/// pairwise distinct; sampling is uniform over `[0, horizon]` at midpoints.
pub fn observable_equilibration_check(
    amps: &AmplitudeVector,
    observable: &Matrix,
    horizon: f64,
    sample_times: usize,
    slack: f64,
) -> Result<ObservableReport> {
    let d = amps.len();
    if observable.rows() != d || observable.cols() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: observable.rows(),
        });
    }
    if sample_times < 2 {
        return Err(Error::TooFewItems {
            what: "sample times",
            needed: 2,
            got: sample_times,
        });
    }
    if !(horizon > 0.0) {
        return Err(invalid("horizon", "must be > 0"));
    }
    if observable.symmetry_residual() > 1e-12 {
        return Err(invalid("observable", "must be symmetric"));
    }
    let energies = amps.energies();
    let mut min_gap = f64::INFINITY;
    for m in 0..d {
        for n in (m + 1)..d {
            let g = math::abs(energies[m] - energies[n]);
            if g == 0.0 {
                return Err(Error::DegenerateEnergies { index: n });
            }
            min_gap = min_gap.min(g);
        }
    }
    let a_norm = linalg::sym_eigenvalues(observable)?
        .iter()
        .fold(0.0_f64, |acc, &l| acc.max(math::abs(l)));
    let d_eff = effective_dimension(amps);
    // off-diagonal dephasing terms z_{mn} = c_m conj(c_n) A_{nm}
    let c = amps.amplitudes();
    let mut pairs: Vec<(f64, Complex64)> = Vec::new();
    for m in 0..d {
        for n in (m + 1)..d {
            let a_nm = observable[(n, m)];
            if a_nm == 0.0 {
                continue;
            }
            let z = c[m] * c[n].conj() * a_nm;
            pairs.push((energies[m] - energies[n], z));
        }
    }
    let mut times = Vec::with_capacity(sample_times);
    let mut deviation = Vec::with_capacity(sample_times);
    let mut acc = 0.0;
    for u in 0..sample_times {
        let t = horizon * (u as f64 + 0.5) / sample_times as f64;
        let mut dev = 0.0;
        for &(delta, z) in &pairs {
            dev += 2.0 * (z.re * math::cos(delta * t) + z.im * math::sin(delta * t));
        }
        acc += dev * dev;
        times.push(t);
        deviation.push(dev);
    }
    let mean_sq = acc / sample_times as f64;
    let bound = a_norm * a_norm / d_eff;
    Ok(ObservableReport {
        times,
        deviation,
        mean_sq_deviation: mean_sq,
        bound,
        d_eff,
        operator_norm: a_norm,
        min_gap,
        horizon,
        pass: mean_sq <= bound * (1.0 + slack),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn two_level_window_values_at_zero() {
        let w = MicrocanonicalWindow::from_levels(0, 0.0, 2.0, 0, alloc::vec![0.5, 1.5])
            .unwrap();
        let r = slow_observable_trajectory(&w, &[0.0]).unwrap();
        // d=2: ||O|| = 2 cos(pi/3) = 1; certified = 1/2; exact deviation = 1
        assert!((r.operator_norm - 1.0).abs() < 1e-14);
        assert!((r.certified_bound[0] - 0.5).abs() < 1e-14);
        assert!((r.exact_deviation[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn three_level_window_values_at_zero() {
        let w =
            MicrocanonicalWindow::from_levels(0, 0.0, 2.0, 0, alloc::vec![0.0, 1.0, 2.0])
                .unwrap();
        let r = slow_observable_trajectory(&w, &[0.0]).unwrap();
        // ||O|| = 2 cos(pi/4) = sqrt 2; Tr[O rho(0)] = 4/3; deviation (4/3)/sqrt 2
        assert!((r.operator_norm - math::sqrt(2.0)).abs() < 1e-14);
        assert!((r.exact_deviation[0] - (4.0 / 3.0) / math::sqrt(2.0)).abs() < 1e-14);
        assert!((r.certified_bound[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn certified_bound_at_zero_is_d_minus_one_over_d() {
        for d in 2..=8usize {
            let energies: Vec<f64> = (0..d).map(|i| i as f64 * 0.37).collect();
            let w = MicrocanonicalWindow::from_levels(0, 0.0, 3.0, 0, energies).unwrap();
            let r = slow_observable_trajectory(&w, &[0.0]).unwrap();
            let want = (d as f64 - 1.0) / d as f64;
            assert!((r.certified_bound[0] - want).abs() < 1e-14);
            // exact deviation at t=0: (2 (d-1)/d) / (2 cos(pi/(d+1)))
            let want_dev = 2.0 * want / (2.0 * math::cos(math::PI / (d as f64 + 1.0)));
            assert!((r.exact_deviation[0] - want_dev).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_deviation_dominates_certified_bound_everywhere() {
        let energies = alloc::vec![1.0, 1.13, 1.21, 1.4, 1.55];
        let w = MicrocanonicalWindow::from_levels(2, 1.0, 0.6, 0, energies).unwrap();
        let ts = grid(200.0, 4001);
        let r = slow_observable_trajectory(&w, &ts).unwrap();
        for i in 0..ts.len() {
            assert!(
                r.exact_deviation[i] >= r.certified_bound[i] - 1e-12,
                "t={}: {} < {}",
                ts[i],
                r.exact_deviation[i],
                r.certified_bound[i]
            );
        }
    }

    #[test]
    fn certified_bound_dominates_quadratic_termwise_form() {
        // (1/d) sum cos(g t) >= (d-1)/d - sum g^2 t^2/(2d)
        let energies = alloc::vec![0.0, 0.8, 1.7, 2.1];
        let w = MicrocanonicalWindow::from_levels(0, 0.0, 3.0, 0, energies).unwrap();
        let ts = grid(10.0, 1001);
        let r = slow_observable_trajectory(&w, &ts).unwrap();
        let d = 4.0;
        for i in 0..ts.len() {
            let termwise = (d - 1.0) / d + (r.quadratic_bound[i] - 1.0);
            assert!(r.certified_bound[i] >= termwise - 1e-12);
        }
    }

    #[test]
    fn diagonal_observable_never_deviates() {
        let amps = AmplitudeVector::uniform(alloc::vec![0.1, 0.9, 1.7]).unwrap();
        let mut a = Matrix::zeros(3, 3);
        for i in 0..3 {
            a[(i, i)] = i as f64 + 0.5;
        }
        let r = observable_equilibration_check(&amps, &a, 100.0, 64, 0.1).unwrap();
        for dev in &r.deviation {
            assert_eq!(*dev, 0.0);
        }
        assert!(r.pass);
    }

    #[test]
    fn two_level_hopping_saturates_the_bound() {
        let g = 1.0;
        let amps = AmplitudeVector::uniform(alloc::vec![0.0, g]).unwrap();
        let mut a = Matrix::zeros(2, 2);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = 1.0;
        let horizon = 1e4 / g;
        let r = observable_equilibration_check(&amps, &a, horizon, 20_000, 0.1).unwrap();
        // time average of cos^2(g t) = 1/2 = ||A||^2 / d_eff
        assert!((r.bound - 0.5).abs() < 1e-12);
        assert!((r.mean_sq_deviation - 0.5).abs() < 1e-3, "{}", r.mean_sq_deviation);
        assert!(r.pass);
    }

    #[test]
    fn random_eight_level_instance_respects_bound() {
        let mut rng = SplitMix64::new(2024);
        let d = 8;
        let mut energies: Vec<f64> = (0..d)
            .map(|i| i as f64 + 0.3 * rng.next_f64())
            .collect();
        energies.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut raw = alloc::vec![Complex64::new(0.0, 0.0); d];
        for c in raw.iter_mut() {
            let (x, y) = rng.next_gaussian_pair();
            *c = Complex64::new(x, y);
        }
        let amps = AmplitudeVector::normalized(raw, energies.clone()).unwrap();
        let mut a = Matrix::zeros(d, d);
        for i in 0..d - 1 {
            a[(i, i + 1)] = 1.0;
            a[(i + 1, i)] = 1.0;
        }
        let min_gap = energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let horizon = 1e4 / min_gap;
        let r = observable_equilibration_check(&amps, &a, horizon, 10_000, 0.1).unwrap();
        assert!(
            r.mean_sq_deviation <= r.bound * 1.1,
            "mean {} bound {}",
            r.mean_sq_deviation,
            r.bound
        );
        assert!(r.pass);
    }

    #[test]
    fn degenerate_energies_rejected() {
        let amps = AmplitudeVector::uniform(alloc::vec![1.0, 1.0]).unwrap();
        let mut a = Matrix::zeros(2, 2);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = 1.0;
        assert!(matches!(
            observable_equilibration_check(&amps, &a, 10.0, 16, 0.1),
            Err(Error::DegenerateEnergies { .. })
        ));
    }
}
