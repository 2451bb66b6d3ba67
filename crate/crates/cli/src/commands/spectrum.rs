//! `ymqm spectrum`: truncation sweep, final solve, charge classification,
//! sector enumeration, sizes; emits `spectrum.csv` and `sweep.json`.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use ymqm_core::eigen::{dense_full_spectrum_with_threshold, truncation_sweep, EigenResult};
use ymqm_core::model::{assemble_charge_squared, size_operator, ModelSpec};
use ymqm_core::spectrum::analyze_spectrum;

use super::CommandContext;
use crate::csvio;
use crate::manifest::sha256_hex;

#[derive(Serialize)]
struct SweepReport {
    levels: Vec<SweepLevelReport>,
    stability_tol: f64,
    extrapolated_4h: Option<Vec<f64>>,
    extrapolated_energy: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct SweepLevelReport {
    h0: usize,
    l0: usize,
    eigenvalues_4h: Vec<f64>,
    deltas: Option<Vec<f64>>,
    stable: Vec<bool>,
}

pub fn run(ctx: &CommandContext) -> Result<(), String> {
    let manifest = ctx.manifest("spectrum", &[]).map_err(|e| e.to_string())?;
    let mut req = ctx.config.solver.to_request();
    req.seed = ctx.seed;
    let model = &ctx.config.model;

    // sweep levels, ending at the configured model truncation
    let mut specs: Vec<ModelSpec> = ctx
        .config
        .sweep
        .levels
        .iter()
        .map(|[h0, l0]| model.spec_for(*h0, *l0))
        .collect();
    let final_spec = model.to_spec();
    if specs
        .last()
        .map(|s| (s.h0(), s.l0()) != (final_spec.h0(), final_spec.l0()))
        .unwrap_or(true)
    {
        specs.push(final_spec);
    }
    for s in &specs {
        s.validate().map_err(|e| e.to_string())?;
    }

    let (final_solve, sweep_report) = if specs.len() >= 2 {
        let sweep = truncation_sweep(&specs, req.k, &req).map_err(|e| e.to_string())?;
        let report = SweepReport {
            levels: sweep
                .levels
                .iter()
                .map(|l| SweepLevelReport {
                    h0: l.h0,
                    l0: l.l0,
                    eigenvalues_4h: l.eigenvalues.clone(),
                    deltas: l.deltas.clone(),
                    stable: l.stable.clone(),
                })
                .collect(),
            stability_tol: sweep.stability_tol,
            extrapolated_energy: sweep
                .extrapolated
                .as_ref()
                .map(|v| v.iter().map(|x| x / 4.0).collect()),
            extrapolated_4h: sweep.extrapolated,
        };
        (sweep.final_solve, report)
    } else {
        // no sweep: single solve (dense path for small dims)
        let solve = if final_spec.dim() <= req.dense_threshold {
            let op = ymqm_core::model::assemble_4h(&final_spec).map_err(|e| e.to_string())?;
            let full =
                dense_full_spectrum_with_threshold(&op, req.dense_threshold).map_err(|e| e.to_string())?;
            full
        } else {
            let op = ymqm_core::model::assemble_4h(&final_spec).map_err(|e| e.to_string())?;
            ymqm_core::eigen::solve_sector_decomposed(&op, &req, None).map_err(|e| e.to_string())?
        };
        (
            solve,
            SweepReport {
                levels: Vec::new(),
                stability_tol: ymqm_core::eigen::DEFAULT_STABILITY_TOL,
                extrapolated_4h: None,
                extrapolated_energy: None,
            },
        )
    };

    // classification on the final level
    let q2 = assemble_charge_squared(&final_spec).map_err(|e| e.to_string())?;
    let size = size_operator(&final_spec).map_err(|e| e.to_string())?;
    let opts = ctx.config.analysis.to_options(req.tol);
    let records =
        analyze_spectrum(&final_solve, &q2, &size, &opts).map_err(|e| e.to_string())?;

    let unconverged = final_solve.converged.iter().filter(|&&c| !c).count();
    if unconverged > 0 {
        eprintln!(
            "warning: {unconverged}/{} eigenpairs above residual tolerance; rows carry their residuals",
            final_solve.len()
        );
    }

    let spectrum_path = ctx.path("spectrum.csv");
    csvio::write_spectrum_csv(&spectrum_path, &records).map_err(|e| e.to_string())?;
    let sweep_path = ctx.path("sweep.json");
    super::write_json(&sweep_path, &sweep_report).map_err(|e| e.to_string())?;

    let mut outputs: Vec<PathBuf> = vec![spectrum_path.clone(), sweep_path];
    if ctx.config.output.store_eigenvectors {
        outputs.extend(write_eigenvectors(ctx, &final_solve).map_err(|e| e.to_string())?);
    }
    println!(
        "spectrum: {} states at ({},{}); ground E = {:.6} -> {}",
        records.len(),
        final_spec.h0(),
        final_spec.l0(),
        records
            .iter()
            .map(|r| r.energy)
            .fold(f64::INFINITY, f64::min),
        spectrum_path.display()
    );
    manifest.finalize(&outputs).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct EigenvectorHeader {
    dim: usize,
    count: usize,
    order: &'static str,
    layout: &'static str,
    format: &'static str,
    sha256: String,
    eigenvalues_4h: Vec<f64>,
}

/// Raw little-endian f64 column dump with a JSON header carrying the
/// checksum and layout.
fn write_eigenvectors(
    ctx: &CommandContext,
    solve: &EigenResult,
) -> std::io::Result<Vec<PathBuf>> {
    let bin_path = ctx.path("eigenvectors.f64le");
    let mut bytes: Vec<u8> = Vec::with_capacity(solve.dim() * solve.len() * 8);
    for j in 0..solve.len() {
        for i in 0..solve.dim() {
            bytes.extend_from_slice(&solve.eigenvectors[(i, j)].to_le_bytes());
        }
    }
    std::fs::File::create(&bin_path)?.write_all(&bytes)?;
    let header = EigenvectorHeader {
        dim: solve.dim(),
        count: solve.len(),
        order: "ascending-eigenvalue",
        layout: "column-major",
        format: "f64-little-endian",
        sha256: sha256_hex(&bytes),
        eigenvalues_4h: solve.eigenvalues.clone(),
    };
    let head_path = ctx.path("eigenvectors.json");
    super::write_json(&head_path, &header)?;
    Ok(vec![bin_path, head_path])
}
