//! Truncation-convergence sweeps over nested model specs.
//!
//! Nested bases make every tracked eigenvalue non-increasing (variational
//! principle), so stability between successive levels certifies convergence.
//! The tail of the sweep is extrapolated with `lambda(h0) = lambda_inf +
//! c exp(-gamma h0)` fitted through the last three levels.

use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::{solve_sector_decomposed, EigenRequest, EigenResult};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{assemble_4h, ModelSpec};

pub const DEFAULT_STABILITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct SweepLevel {
    pub h0: usize,
    pub l0: usize,
    pub eigenvalues: Vec<f64>,
    /// |delta to previous level| per tracked eigenvalue (first level: None).
    pub deltas: Option<Vec<f64>>,
    /// delta below `stability_tol`?
    pub stable: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub levels: Vec<SweepLevel>,
    pub stability_tol: f64,
    /// Exponential-fit extrapolation per tracked eigenvalue (needs >= 3 levels).
    pub extrapolated: Option<Vec<f64>>,
    /// Final-level solve, for downstream classification.
    pub final_solve: EigenResult,
}

/// Fit `y = y_inf + c exp(-gamma x)` through three points with ascending x
/// and return `y_inf`. Falls back to the last value when the decay is not
/// resolvable (non-monotone or exhausted deltas).
pub fn extrapolate_exponential(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d1 = y[0] - y[1];
    let d2 = y[1] - y[2];
    if !(d1 > 0.0) || !(d2 > 0.0) {
        return y[2];
    }
    let ratio = d1 / d2;
    let f = |gamma: f64| -> f64 {
        let e1 = math::exp(-gamma * x[0]) - math::exp(-gamma * x[1]);
        let e2 = math::exp(-gamma * x[1]) - math::exp(-gamma * x[2]);
        e1 / e2
    };
    // f(gamma) is continuous and increasing towards +inf; bracket then bisect
    let mut lo = 1e-9;
    let mut hi = 1.0;
    if f(lo) >= ratio {
        // slower than any resolvable exponential: geometric-series fallback
        // with the spacing-averaged ratio
        let q = d2 / d1;
        if q < 1.0 {
            return y[2] - d2 * q / (1.0 - q);
        }
        return y[2];
    }
    let mut guard = 0;
    while f(hi) < ratio {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return y[2];
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let c = d2 / (math::exp(-gamma * x[1]) - math::exp(-gamma * x[2]));
    y[2] - c * math::exp(-gamma * x[2])
}

/// Solve the Hamiltonian across nested truncations, tracking the `k` lowest
/// eigenvalues of `4H`. Levels must be nondecreasing in both `h0` and `l0`.
/// Each level seeds the next level's Krylov start with its lowest
/// eigenvectors (embedded in the larger basis).
pub fn truncation_sweep(
    specs: &[ModelSpec],
    k: usize,
    base_request: &EigenRequest,
) -> Result<SweepResult> {
    if specs.len() < 2 {
        return Err(Error::TooFewItems {
            what: "sweep levels",
            needed: 2,
            got: specs.len(),
        });
    }
    for w in specs.windows(2) {
        if w[1].h0() < w[0].h0() || w[1].l0() < w[0].l0() {
            return Err(Error::NotNested);
        }
    }
    let mut levels: Vec<SweepLevel> = Vec::with_capacity(specs.len());
    let mut prev_vals: Option<Vec<f64>> = None;
    let mut prev_vectors: Option<(usize, usize, Vec<Vec<f64>>)> = None;
    let mut final_solve: Option<EigenResult> = None;
    for spec in specs {
        let op = assemble_4h(spec)?;
        let mut req = *base_request;
        req.k = k;
        // seed each sector with the previous level's eigenvectors, embedded
        // into the enlarged basis
        let seeds: Option<Vec<Vec<f64>>> = prev_vectors.as_ref().map(|(h0s, l0s, vs)| {
            vs.iter()
                .map(|v| embed(v, *h0s, *l0s, spec.h0(), spec.l0()))
                .collect()
        });
        let solve = solve_sector_decomposed(&op, &req, seeds.as_deref())?;
        let vals = solve.eigenvalues.clone();
        let deltas = prev_vals
            .as_ref()
            .map(|p| {
                p.iter()
                    .zip(vals.iter())
                    .map(|(a, b)| math::abs(a - b))
                    .collect::<Vec<f64>>()
            });
        let stable = match &deltas {
            Some(d) => d.iter().map(|&x| x < DEFAULT_STABILITY_TOL).collect(),
            None => vec![false; vals.len()],
        };
        levels.push(SweepLevel {
            h0: spec.h0(),
            l0: spec.l0(),
            eigenvalues: vals.clone(),
            deltas,
            stable,
        });
        prev_vectors = Some((
            spec.h0(),
            spec.l0(),
            (0..solve.len())
                .map(|j| solve.eigenvectors.col_to_vec(j))
                .collect(),
        ));
        prev_vals = Some(vals);
        final_solve = Some(solve);
    }
    let extrapolated = if levels.len() >= 3 {
        let n = levels.len();
        let xs = [
            levels[n - 3].h0 as f64,
            levels[n - 2].h0 as f64,
            levels[n - 1].h0 as f64,
        ];
        let tracked = levels[n - 1].eigenvalues.len();
        let mut out = Vec::with_capacity(tracked);
        for j in 0..tracked {
            let ys = [
                levels[n - 3].eigenvalues.get(j).copied().unwrap_or(f64::NAN),
                levels[n - 2].eigenvalues.get(j).copied().unwrap_or(f64::NAN),
                levels[n - 1].eigenvalues[j],
            ];
            if ys.iter().any(|y| !y.is_finite()) {
                out.push(levels[n - 1].eigenvalues[j]);
            } else {
                out.push(extrapolate_exponential(xs, ys));
            }
        }
        Some(out)
    } else {
        None
    };
    Ok(SweepResult {
        levels,
        stability_tol: DEFAULT_STABILITY_TOL,
        extrapolated,
        final_solve: final_solve.expect("at least two levels solved"),
    })
}

/// Embed a vector from truncation (h0s, l0s) into (h0d, l0d) >= it,
/// preserving (i, j, k) indices.
fn embed(v: &[f64], h0s: usize, l0s: usize, h0d: usize, l0d: usize) -> Vec<f64> {
    let mut out = vec![0.0; h0d * h0d * l0d];
    for i in 0..h0s {
        for j in 0..h0s {
            for k in 0..l0s {
                out[(i * h0d + j) * l0d + k] = v[(i * h0s + j) * l0s + k];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::SolveMode;

    #[test]
    fn extrapolation_recovers_exact_exponential() {
        let (y_inf, c, gamma) = (1.0554, 0.8, 0.21);
        let xs = [16.0, 24.0, 32.0];
        let ys = xs.map(|x| y_inf + c * math::exp(-gamma * x));
        let got = extrapolate_exponential(xs, ys);
        assert!((got - y_inf).abs() < 1e-9, "{got}");
    }

    #[test]
    fn extrapolation_handles_converged_input() {
        let got = extrapolate_exponential([8.0, 12.0, 16.0], [2.0, 2.0, 2.0]);
        assert_eq!(got, 2.0);
    }

    #[test]
    fn constant_sweep_is_stable_with_zero_deltas() {
        let spec = ModelSpec::new(4, 4);
        let mut req = EigenRequest::lowest(3);
        req.mode = SolveMode::Auto;
        let sweep = truncation_sweep(&[spec, spec], 3, &req).unwrap();
        let last = sweep.levels.last().unwrap();
        let deltas = last.deltas.as_ref().unwrap();
        for d in deltas {
            assert!(*d < 1e-12, "delta {d}");
        }
        assert!(last.stable.iter().all(|&s| s));
    }

    #[test]
    fn nested_sweep_is_monotone() {
        let specs = [ModelSpec::new(3, 4), ModelSpec::new(4, 5), ModelSpec::new(5, 6)];
        let mut req = EigenRequest::lowest(3);
        req.mode = SolveMode::Auto;
        let sweep = truncation_sweep(&specs, 3, &req).unwrap();
        for w in sweep.levels.windows(2) {
            for j in 0..3 {
                assert!(
                    w[1].eigenvalues[j] <= w[0].eigenvalues[j] + 2e-8,
                    "level {j} not monotone: {} -> {}",
                    w[0].eigenvalues[j],
                    w[1].eigenvalues[j]
                );
            }
        }
        assert!(sweep.extrapolated.is_some());
    }

    #[test]
    fn non_nested_sweep_is_rejected() {
        let specs = [ModelSpec::new(5, 5), ModelSpec::new(4, 6)];
        let req = EigenRequest::lowest(2);
        assert!(matches!(
            truncation_sweep(&specs, 2, &req),
            Err(Error::NotNested)
        ));
    }

    #[test]
    fn single_level_is_rejected() {
        let specs = [ModelSpec::new(4, 4)];
        let req = EigenRequest::lowest(2);
        assert!(matches!(
            truncation_sweep(&specs, 2, &req),
            Err(Error::TooFewItems { .. })
        ));
    }
}
