//! Equilibration analysis: time-averaged states, effective dimensions,
//! micro-canonical Haar statistics, slow observables, and the subsystem
//! trace-norm bound.
//!
//! All analyses operate within a fixed |q| sector with one representative
//! level per degenerate pair; levels closer than the configured tolerance
//! must be merged before the dephasing arguments apply.

mod haar;
mod subsystem;
mod trajectory;

pub use haar::{haar_microcanonical_stats, HaarStats};
pub use subsystem::{
    partial_trace, subsystem_equilibration_check, Bipartition, SubsystemReport, SubsystemSlot,
    trace_norm_hermitian,
};
pub use trajectory::{
    observable_equilibration_check, slow_observable_trajectory, ObservableReport,
    TrajectoryReport,
};

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::spectrum::{ReggeFit, SpectralRecord};

/// Expansion of a pure state over a listed eigenbasis subset.
#[derive(Debug, Clone)]
pub struct AmplitudeVector {
    amplitudes: Vec<Complex64>,
    energies: Vec<f64>,
}

impl AmplitudeVector {
    /// Requires normalization `sum |c|^2 = 1` within 1e-12.
    pub fn new(amplitudes: Vec<Complex64>, energies: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != energies.len() {
            return Err(Error::LengthMismatch {
                expected: energies.len(),
                got: amplitudes.len(),
            });
        }
        if amplitudes.is_empty() {
            return Err(Error::EmptySelection { what: "amplitudes" });
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if math::abs(norm - 1.0) > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes,
            energies,
        })
    }

    /// Normalize and wrap.
    pub fn normalized(mut amplitudes: Vec<Complex64>, energies: Vec<f64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !(norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        let inv = 1.0 / math::sqrt(norm);
        for c in amplitudes.iter_mut() {
            *c *= inv;
        }
        Self::new(amplitudes, energies)
    }

    /// Uniform superposition over the given levels.
    pub fn uniform(energies: Vec<f64>) -> Result<Self> {
        let d = energies.len();
        if d == 0 {
            return Err(Error::EmptySelection { what: "energies" });
        }
        let c = Complex64::new(1.0 / math::sqrt(d as f64), 0.0);
        Self::new(alloc::vec![c; d], energies)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
}

/// Diagonal weights of the time-averaged (dephased) state
/// `omega = sum_n |c_n|^2 |n><n|`. Errors if two listed energies coincide
/// within `degeneracy_tol` — degenerate entries must be merged upstream.
pub fn time_averaged_state(amps: &AmplitudeVector, degeneracy_tol: f64) -> Result<Vec<f64>> {
    let mut sorted: Vec<(f64, usize)> = amps
        .energies
        .iter()
        .copied()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    for w in sorted.windows(2) {
        if math::abs(w[1].0 - w[0].0) <= degeneracy_tol {
            return Err(Error::DegenerateEnergies { index: w[1].1 });
        }
    }
    Ok(amps.amplitudes.iter().map(|c| c.norm_sqr()).collect())
}

/// `d_eff = 1 / sum_n |c_n|^4`; 1 for an eigenstate, d for a uniform
/// superposition over d levels.
pub fn effective_dimension(amps: &AmplitudeVector) -> f64 {
    let sum4: f64 = amps.amplitudes.iter().map(|c| c.norm_sqr() * c.norm_sqr()).sum();
    1.0 / sum4
}

/// A micro-canonical energy window: the `d_Delta` consecutive levels of a
/// fixed |q| sector inside `[e_base, e_base + delta]`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MicrocanonicalWindow {
    pub q_abs: u32,
    pub e_base: f64,
    pub delta: f64,
    /// First sector index in the window.
    pub n_first: u32,
    /// Level energies, ascending, all inside the window.
    pub energies: Vec<f64>,
}

impl MicrocanonicalWindow {
    pub fn d_delta(&self) -> usize {
        self.energies.len()
    }

    /// Build from explicit levels, validating the window invariants.
    pub fn from_levels(
        q_abs: u32,
        e_base: f64,
        delta: f64,
        n_first: u32,
        energies: Vec<f64>,
    ) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::EmptySelection { what: "window levels" });
        }
        for w in energies.windows(2) {
            if w[1] < w[0] {
                return Err(invalid("energies", "window levels must ascend"));
            }
        }
        for &e in &energies {
            if e < e_base - 1e-12 || e > e_base + delta + 1e-12 {
                return Err(invalid("energies", "level outside [E, E+Delta]"));
            }
        }
        Ok(Self {
            q_abs,
            e_base,
            delta,
            n_first,
            energies,
        })
    }

    /// Extract the window from classified records: one representative per n
    /// (pair energies averaged), consecutive n required.
    pub fn from_records(
        records: &[SpectralRecord],
        q_abs: u32,
        e_base: f64,
        delta: f64,
    ) -> Result<Self> {
        let mut levels: Vec<(u32, f64, usize)> = Vec::new();
        for r in records.iter().filter(|r| r.q_abs == q_abs) {
            match levels.iter_mut().find(|(n, _, _)| *n == r.n) {
                Some((_, e, c)) => {
                    *e += r.energy;
                    *c += 1;
                }
                None => levels.push((r.n, r.energy, 1)),
            }
        }
        let mut levels: Vec<(u32, f64)> = levels
            .into_iter()
            .map(|(n, e, c)| (n, e / c as f64))
            .collect();
        levels.sort_by_key(|(n, _)| *n);
        let selected: Vec<(u32, f64)> = levels
            .into_iter()
            .filter(|(_, e)| *e >= e_base && *e <= e_base + delta)
            .collect();
        if selected.is_empty() {
            return Err(Error::EmptySelection { what: "window levels" });
        }
        for w in selected.windows(2) {
            if w[1].0 != w[0].0 + 1 {
                return Err(Error::NonConsecutiveWindow);
            }
        }
        Self::from_levels(
            q_abs,
            e_base,
            delta,
            selected[0].0,
            selected.iter().map(|(_, e)| *e).collect(),
        )
    }
}

/// Micro-canonical density estimate from a trajectory fit.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MicrocanonicalEstimate {
    pub q_abs: u32,
    pub e: f64,
    pub delta: f64,
    /// `alpha Delta (E+E0)^(alpha-1) / c`
    pub d_delta_estimate: f64,
    /// `d_delta_estimate / 2 + 1/2`
    pub deff_lower_bound: f64,
}

/// Level-count and expected-d_eff estimates for a window `[E, E+Delta]` in
/// sector `q_abs`, from the fitted trajectory parameters.
pub fn microcanonical_deff_estimate(
    fit: &ReggeFit,
    e: f64,
    delta: f64,
    q_abs: u32,
) -> Result<MicrocanonicalEstimate> {
    if !(fit.c > 0.0) {
        return Err(Error::NonPositiveSlope { c: fit.c });
    }
    let density = fit.alpha * math::powf(e + fit.e0, fit.alpha - 1.0) / fit.c;
    let d_delta_estimate = density * delta;
    Ok(MicrocanonicalEstimate {
        q_abs,
        e,
        delta,
        d_delta_estimate,
        deff_lower_bound: 0.5 * d_delta_estimate + 0.5,
    })
}

/// One sector's gap audit against the trajectory bound
/// `gap <= c / (alpha (E+E0)^(alpha-1))`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SectorGapReport {
    pub q_abs: u32,
    pub checked: usize,
    pub violations: usize,
    pub max_gap: f64,
    /// Largest observed gap/bound ratio.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapBoundReport {
    pub sectors: Vec<SectorGapReport>,
    pub total_checked: usize,
    pub total_violations: usize,
    pub violation_fraction: f64,
    pub e_floor: f64,
}

/// Audit per-sector gaps above `e_floor` against the fitted bound. The bound
/// is evaluated at the lower level of each gap; it decreases with energy for
/// `alpha > 1`.
pub fn gap_bound_check(
    records: &[SpectralRecord],
    fit: &ReggeFit,
    e_floor: f64,
) -> Result<GapBoundReport> {
    if !(fit.c > 0.0) {
        return Err(Error::NonPositiveSlope { c: fit.c });
    }
    let mut sectors_list: Vec<u32> = records.iter().map(|r| r.q_abs).collect();
    sectors_list.sort_unstable();
    sectors_list.dedup();
    let mut sectors = Vec::new();
    let mut total_checked = 0usize;
    let mut total_violations = 0usize;
    for q in sectors_list {
        let mut levels: Vec<(u32, f64, usize)> = Vec::new();
        for r in records.iter().filter(|r| r.q_abs == q) {
            match levels.iter_mut().find(|(n, _, _)| *n == r.n) {
                Some((_, e, c)) => {
                    *e += r.energy;
                    *c += 1;
                }
                None => levels.push((r.n, r.energy, 1)),
            }
        }
        let mut energies: Vec<f64> = levels
            .into_iter()
            .map(|(_, e, c)| e / c as f64)
            .filter(|&e| e >= e_floor)
            .collect();
        energies.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        if energies.len() < 2 {
            continue;
        }
        let mut checked = 0usize;
        let mut violations = 0usize;
        let mut max_gap = 0.0_f64;
        let mut worst_ratio = 0.0_f64;
        for w in energies.windows(2) {
            let gap = w[1] - w[0];
            let bound = fit.c / (fit.alpha * math::powf(w[0] + fit.e0, fit.alpha - 1.0));
            checked += 1;
            max_gap = max_gap.max(gap);
            worst_ratio = worst_ratio.max(gap / bound);
            if gap > bound {
                violations += 1;
            }
        }
        total_checked += checked;
        total_violations += violations;
        sectors.push(SectorGapReport {
            q_abs: q,
            checked,
            violations,
            max_gap,
            worst_ratio,
        });
    }
    if total_checked == 0 {
        return Err(Error::EmptySelection { what: "gaps above floor" });
    }
    Ok(GapBoundReport {
        sectors,
        total_checked,
        total_violations,
        violation_fraction: total_violations as f64 / total_checked as f64,
        e_floor,
    })
}
