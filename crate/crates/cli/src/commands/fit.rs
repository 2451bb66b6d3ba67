//! `ymqm fit`: Regge-trajectory fits of a computed spectrum, plus the
//! trajectory, Chew-Frautschi and size figures.

use std::path::{Path, PathBuf};

use serde::Serialize;
use ymqm_core::spectrum::{
    regge_fit, ReggeFit, ReggeMode, ReggeOptions, SpectralRecord,
};

use super::CommandContext;
use crate::csvio;
use crate::svg::{line_plot, Series};

#[derive(Serialize)]
struct FitReport {
    alpha_free: FitParams,
    alpha_fixed_2: FitParams,
    region: RegionEcho,
    n_records: usize,
}

#[derive(Serialize)]
struct RegionEcho {
    q_min: u32,
    q_max: u32,
    n_max: u32,
    per_q_n_max: Vec<(u32, u32)>,
}

#[derive(Serialize)]
struct FitParams {
    alpha: f64,
    e0: f64,
    a: f64,
    b: f64,
    c: f64,
    rms_residual: f64,
    iterations: usize,
    n_points: usize,
    param_names: Vec<String>,
    covariance: Vec<Vec<f64>>,
    parameter_sigmas: Vec<f64>,
}

fn params_of(fit: &ReggeFit) -> FitParams {
    let p = fit.param_names.len();
    let mut covariance = Vec::with_capacity(p);
    let mut sigmas = Vec::with_capacity(p);
    for i in 0..p {
        covariance.push((0..p).map(|j| fit.covariance[(i, j)]).collect());
        sigmas.push(fit.covariance[(i, i)].max(0.0).sqrt());
    }
    FitParams {
        alpha: fit.alpha,
        e0: fit.e0,
        a: fit.a,
        b: fit.b,
        c: fit.c,
        rms_residual: fit.rms_residual,
        iterations: fit.iterations,
        n_points: fit.n_points,
        param_names: fit.param_names.clone(),
        covariance,
        parameter_sigmas: sigmas,
    }
}

pub fn run(ctx: &CommandContext, spectrum_path: &Path) -> Result<(), String> {
    let manifest = ctx
        .manifest("fit", &[spectrum_path.to_path_buf()])
        .map_err(|e| e.to_string())?;
    let records = csvio::read_spectrum_csv(spectrum_path)?;
    let region = ctx.config.fit.to_region();
    let opts = ReggeOptions::default();
    let free = regge_fit(&records, &region, ReggeMode::AlphaFree, &opts)
        .map_err(|e| format!("alpha-free fit: {e}"))?;
    let fixed = regge_fit(&records, &region, ReggeMode::AlphaFixed2, &opts)
        .map_err(|e| format!("alpha=2 fit: {e}"))?;
    let report = FitReport {
        alpha_free: params_of(&free),
        alpha_fixed_2: params_of(&fixed),
        region: RegionEcho {
            q_min: region.q_min,
            q_max: region.q_max,
            n_max: region.default_n_max,
            per_q_n_max: region.per_q_n_max.clone(),
        },
        n_records: records.len(),
    };
    let fit_path = ctx.path("regge_fit.json");
    super::write_json(&fit_path, &report).map_err(|e| e.to_string())?;

    let regge_svg = ctx.path("regge.svg");
    std::fs::write(&regge_svg, regge_plot(&records, &free)).map_err(|e| e.to_string())?;
    let cf_svg = ctx.path("chew_frautschi.svg");
    std::fs::write(&cf_svg, chew_frautschi_plot(&records, &fixed)).map_err(|e| e.to_string())?;
    let sizes_svg = ctx.path("sizes.svg");
    std::fs::write(&sizes_svg, sizes_plot(&records)).map_err(|e| e.to_string())?;

    println!(
        "fit: alpha = {:.4} +- {:.4}, E0 = {:.4}; alpha=2 slope b = {:.4}; rms {:.2e} -> {}",
        free.alpha,
        report.alpha_free.parameter_sigmas.first().copied().unwrap_or(0.0),
        free.e0,
        fixed.b,
        free.rms_residual,
        fit_path.display()
    );
    manifest
        .finalize(&[fit_path, regge_svg, cf_svg, sizes_svg])
        .map_err(|e| e.to_string())
}

fn sectors_of(records: &[SpectralRecord]) -> Vec<u32> {
    let mut qs: Vec<u32> = records.iter().map(|r| r.q_abs).collect();
    qs.sort_unstable();
    qs.dedup();
    qs
}

/// One representative energy per (q, n).
fn sector_levels(records: &[SpectralRecord], q: u32) -> Vec<(u32, f64, bool)> {
    let mut levels: Vec<(u32, f64, usize, bool)> = Vec::new();
    for r in records.iter().filter(|r| r.q_abs == q) {
        match levels.iter_mut().find(|(n, _, _, _)| *n == r.n) {
            Some((_, e, c, flag)) => {
                *e += r.energy;
                *c += 1;
                *flag |= r.degenerate_pair;
            }
            None => levels.push((r.n, r.energy, 1, r.degenerate_pair)),
        }
    }
    levels.sort_by_key(|(n, _, _, _)| *n);
    levels
        .into_iter()
        .map(|(n, e, c, f)| (n, e / c as f64, f))
        .collect()
}

/// `(E + E0)^alpha` against n, one series per |q|, fitted lines overlaid.
fn regge_plot(records: &[SpectralRecord], fit: &ReggeFit) -> String {
    let mut series = Vec::new();
    for q in sectors_of(records) {
        let levels = sector_levels(records, q);
        let markers: Vec<(f64, f64)> = levels
            .iter()
            .map(|(n, e, _)| (*n as f64, (e + fit.e0).powf(fit.alpha)))
            .collect();
        let n_hi = levels.last().map(|(n, _, _)| *n as f64).unwrap_or(0.0);
        let line: Vec<(f64, f64)> = [0.0, n_hi]
            .iter()
            .map(|&n| (n, fit.a + fit.b * q as f64 + fit.c * n))
            .collect();
        series.push(Series {
            label: format!("|q| = {q}"),
            points: line,
            markers,
        });
    }
    line_plot(
        &format!("(E + E0)^alpha vs n at alpha = {:.3}", fit.alpha),
        "n",
        "(E + E0)^alpha",
        &series,
    )
}

/// `(E + E0)^2` against |q| at fixed n: the Chew-Frautschi view.
fn chew_frautschi_plot(records: &[SpectralRecord], fit: &ReggeFit) -> String {
    let mut by_n: Vec<(u32, Vec<(f64, f64)>)> = Vec::new();
    for q in sectors_of(records) {
        for (n, e, _) in sector_levels(records, q) {
            let y = (e + fit.e0) * (e + fit.e0);
            match by_n.iter_mut().find(|(nn, _)| *nn == n) {
                Some((_, pts)) => pts.push((q as f64, y)),
                None => by_n.push((n, vec![(q as f64, y)])),
            }
        }
    }
    by_n.sort_by_key(|(n, _)| *n);
    by_n.truncate(6);
    let series: Vec<Series> = by_n
        .into_iter()
        .map(|(n, mut pts)| {
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            Series {
                label: format!("n = {n}"),
                markers: pts.clone(),
                points: pts,
            }
        })
        .collect();
    line_plot(
        "Chew-Frautschi: (E + E0)^2 vs |q| at fixed n",
        "|q|",
        "(E + E0)^2",
        &series,
    )
}

/// Size against energy per sector; near-degenerate pairs highlighted.
fn sizes_plot(records: &[SpectralRecord]) -> String {
    let mut series = Vec::new();
    for q in sectors_of(records) {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        let mut flagged: Vec<(f64, f64)> = Vec::new();
        let mut rows: Vec<&SpectralRecord> =
            records.iter().filter(|r| r.q_abs == q).collect();
        rows.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
        for r in rows {
            pts.push((r.energy, r.size));
            if r.degenerate_pair {
                flagged.push((r.energy, r.size));
            }
        }
        series.push(Series {
            label: format!("|q| = {q}"),
            points: pts,
            markers: flagged,
        });
    }
    line_plot(
        "spatial extension vs energy (markers: near-degenerate pairs)",
        "E",
        "<X^2 x 1 + 1 x X^2>^(1/2)",
        &series,
    )
}

pub fn default_spectrum_path(out_dir: &Path) -> PathBuf {
    out_dir.join("spectrum.csv")
}
