//! `ymqm equilibrate`: Haar micro-canonical statistics, the slow-observable
//! trajectory with its certified bound, the generic observable dephasing
//! check, the density estimate and gap audit from the trajectory fit, and —
//! at dense-path sizes — the subsystem trace-norm check.

use std::path::Path;

use serde::Serialize;
use ymqm_core::eigen::dense_full_spectrum;
use ymqm_core::equilibration::{
    gap_bound_check, haar_microcanonical_stats, microcanonical_deff_estimate,
    observable_equilibration_check, slow_observable_trajectory, subsystem_equilibration_check,
    AmplitudeVector, Bipartition, GapBoundReport, HaarStats, MicrocanonicalEstimate,
    MicrocanonicalWindow, SubsystemSlot,
};
use ymqm_core::linalg::Matrix;
use ymqm_core::model::assemble_4h;
use ymqm_core::spectrum::{regge_fit, ReggeMode, ReggeOptions};

use super::CommandContext;
use crate::csvio;
use crate::svg::{line_plot, Series};

#[derive(Serialize)]
struct EquilibrationReportFile {
    haar: Vec<HaarStats>,
    window: WindowEcho,
    trajectory: TrajectorySummary,
    observable: ObservableSummary,
    density_estimate: MicrocanonicalEstimate,
    gap_audit: GapBoundReport,
    subsystem: Option<SubsystemSummary>,
    seed: u64,
}

#[derive(Serialize)]
struct WindowEcho {
    q_abs: u32,
    e_min: f64,
    delta: f64,
    n_first: u32,
    d_delta: usize,
    energies: Vec<f64>,
}

#[derive(Serialize)]
struct TrajectorySummary {
    d_delta: usize,
    operator_norm: f64,
    certified_bound_at_zero: f64,
    min_exact_minus_certified: f64,
    quadratic_coefficient: f64,
}

#[derive(Serialize)]
struct ObservableSummary {
    d_eff: f64,
    mean_sq_deviation: f64,
    bound: f64,
    pass: bool,
    horizon: f64,
    min_gap: f64,
}

#[derive(Serialize)]
struct SubsystemSummary {
    h0: usize,
    l0: usize,
    d_s: usize,
    d_eff: f64,
    mean_distance: f64,
    bound: f64,
    pass: bool,
}

pub fn run(ctx: &CommandContext, spectrum_path: &Path) -> Result<(), String> {
    let manifest = ctx
        .manifest("equilibrate", &[spectrum_path.to_path_buf()])
        .map_err(|e| e.to_string())?;
    let records = csvio::read_spectrum_csv(spectrum_path)?;
    let eq = &ctx.config.equilibration;

    // Haar Monte Carlo
    let haar: Vec<HaarStats> = eq
        .haar_dims
        .iter()
        .map(|&d| haar_microcanonical_stats(d, eq.haar_samples, ctx.seed))
        .collect();

    // micro-canonical window and the slow observable
    let window =
        MicrocanonicalWindow::from_records(&records, eq.q_abs, eq.window_e_min, eq.window_delta)
            .map_err(|e| format!("window selection: {e}"))?;
    let gaps: Vec<f64> = window.energies.windows(2).map(|w| w[1] - w[0]).collect();
    let gap_sq: f64 = gaps.iter().map(|g| g * g).sum();
    let d = window.d_delta() as f64;
    // grid out to twice the point where the quadratic curve crosses zero
    let t_zero = (2.0 * d / gap_sq.max(1e-300)).sqrt();
    let t_grid: Vec<f64> = (0..600).map(|i| 2.0 * t_zero * i as f64 / 599.0).collect();
    let trajectory =
        slow_observable_trajectory(&window, &t_grid).map_err(|e| format!("trajectory: {e}"))?;
    let min_margin = trajectory
        .exact_deviation
        .iter()
        .zip(trajectory.certified_bound.iter())
        .map(|(e, c)| e - c)
        .fold(f64::INFINITY, f64::min);

    // generic observable bound on the same window (hopping observable)
    let amps = AmplitudeVector::uniform(window.energies.clone())
        .map_err(|e| format!("window amplitudes: {e}"))?;
    let dd = window.d_delta();
    let mut hopping = Matrix::zeros(dd, dd);
    for i in 0..dd.saturating_sub(1) {
        hopping[(i, i + 1)] = 1.0;
        hopping[(i + 1, i)] = 1.0;
    }
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let observable = observable_equilibration_check(
        &amps,
        &hopping,
        eq.horizon_over_min_gap / min_gap,
        eq.time_samples,
        eq.finite_t_slack,
    )
    .map_err(|e| format!("observable check: {e}"))?;

    // trajectory fit for the density estimate and gap audit
    let fit = regge_fit(
        &records,
        &ctx.config.fit.to_region(),
        ReggeMode::AlphaFree,
        &ReggeOptions::default(),
    )
    .map_err(|e| format!("trajectory fit: {e}"))?;
    let density = microcanonical_deff_estimate(&fit, eq.window_e_min, eq.window_delta, eq.q_abs)
        .map_err(|e| e.to_string())?;
    let gap_audit =
        gap_bound_check(&records, &fit, eq.gap_floor).map_err(|e| format!("gap audit: {e}"))?;

    // dense-path subsystem check
    let subsystem = if eq.subsystem.enabled {
        Some(run_subsystem(ctx)?)
    } else {
        None
    };

    let report = EquilibrationReportFile {
        haar,
        window: WindowEcho {
            q_abs: window.q_abs,
            e_min: window.e_base,
            delta: window.delta,
            n_first: window.n_first,
            d_delta: window.d_delta(),
            energies: window.energies.clone(),
        },
        trajectory: TrajectorySummary {
            d_delta: trajectory.d_delta,
            operator_norm: trajectory.operator_norm,
            certified_bound_at_zero: trajectory.certified_bound[0],
            min_exact_minus_certified: min_margin,
            quadratic_coefficient: gap_sq / (2.0 * d),
        },
        observable: ObservableSummary {
            d_eff: observable.d_eff,
            mean_sq_deviation: observable.mean_sq_deviation,
            bound: observable.bound,
            pass: observable.pass,
            horizon: observable.horizon,
            min_gap: observable.min_gap,
        },
        density_estimate: density,
        gap_audit,
        subsystem,
        seed: ctx.seed,
    };
    let json_path = ctx.path("equilibration.json");
    super::write_json(&json_path, &report).map_err(|e| e.to_string())?;

    let csv_path = ctx.path("trajectory.csv");
    csvio::write_trajectory_csv(
        &csv_path,
        &trajectory.times,
        &trajectory.exact_deviation,
        &trajectory.certified_bound,
        &trajectory.quadratic_bound,
    )
    .map_err(|e| e.to_string())?;

    let svg_path = ctx.path("trajectory.svg");
    let plot = line_plot(
        &format!(
            "slow-observable deviation, |q| = {}, d = {}",
            window.q_abs,
            window.d_delta()
        ),
        "t",
        "deviation / bounds",
        &[
            Series {
                label: "exact deviation".into(),
                points: trajectory
                    .times
                    .iter()
                    .zip(trajectory.exact_deviation.iter())
                    .map(|(&t, &v)| (t, v))
                    .collect(),
                markers: vec![],
            },
            Series {
                label: "certified bound".into(),
                points: trajectory
                    .times
                    .iter()
                    .zip(trajectory.certified_bound.iter())
                    .map(|(&t, &v)| (t, v))
                    .collect(),
                markers: vec![],
            },
            Series {
                label: "quadratic curve".into(),
                points: trajectory
                    .times
                    .iter()
                    .zip(trajectory.quadratic_bound.iter())
                    .map(|(&t, &v)| (t, v))
                    .collect(),
                markers: vec![],
            },
        ],
    );
    std::fs::write(&svg_path, plot).map_err(|e| e.to_string())?;

    println!(
        "equilibrate: window d = {}, certified(0) = {:.4}, observable bound pass = {}, haar dims {:?} -> {}",
        window.d_delta(),
        trajectory.certified_bound[0],
        observable.pass,
        eq.haar_dims,
        json_path.display()
    );
    manifest
        .finalize(&[json_path, csv_path, svg_path])
        .map_err(|e| e.to_string())
}

fn run_subsystem(ctx: &CommandContext) -> Result<SubsystemSummary, String> {
    let sub = &ctx.config.equilibration.subsystem;
    let spec = ctx.config.model.spec_for(sub.h0, sub.l0);
    spec.validate().map_err(|e| e.to_string())?;
    let op = assemble_4h(&spec).map_err(|e| e.to_string())?;
    let eigen = dense_full_spectrum(&op).map_err(|e| format!("subsystem dense solve: {e}"))?;
    // initial state: uniform superposition over a mid-spectrum level range
    let dim = op.dim();
    let lo = sub.level_start.min(dim.saturating_sub(2));
    let hi = (lo + sub.level_count).min(dim);
    let mut psi0 = vec![0.0; dim];
    for j in lo..hi {
        let col = eigen.eigenvectors.col_to_vec(j);
        for (p, c) in psi0.iter_mut().zip(col.iter()) {
            *p += c;
        }
    }
    let min_gap = eigen
        .eigenvalues
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|&g| g > 1e-9)
        .fold(f64::INFINITY, f64::min);
    let bip = Bipartition::new(spec.l0(), spec.h0() * spec.h0(), SubsystemSlot::Fast);
    let report = subsystem_equilibration_check(
        &eigen,
        &bip,
        &psi0,
        sub.horizon_over_min_gap / min_gap,
        sub.time_samples,
        1e-9,
        ctx.config.equilibration.finite_t_slack,
    )
    .map_err(|e| format!("subsystem check: {e}"))?;
    Ok(SubsystemSummary {
        h0: spec.h0(),
        l0: spec.l0(),
        d_s: report.d_s,
        d_eff: report.d_eff,
        mean_distance: report.mean_distance,
        bound: report.bound,
        pass: report.pass,
    })
}
