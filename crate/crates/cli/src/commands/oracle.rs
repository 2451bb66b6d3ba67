//! `ymqm oracle`: cross-check the reduced model against the direct
//! six-coordinate construction with gauge-singlet projection.

use serde::Serialize;
use ymqm_core::oracle::{cross_check, CrossCheckReport, FockCutoff};

use super::CommandContext;
use crate::csvio;
use crate::manifest::sha256_hex;

#[derive(Serialize)]
struct OracleReportFile {
    reduced_h0: usize,
    reduced_l0: usize,
    report: CrossCheckReport,
    /// Checksums tying this report to its provenance: the resolved config
    /// and the two construction sections.
    config_sha256: String,
    reduced_section_sha256: String,
    direct_section_sha256: String,
}

pub fn run(ctx: &CommandContext) -> Result<(), String> {
    let manifest = ctx.manifest("oracle", &[]).map_err(|e| e.to_string())?;
    let oc = &ctx.config.oracle;
    if oc.cutoffs.is_empty() {
        return Err("oracle.cutoffs must not be empty".into());
    }
    let cutoffs: Vec<FockCutoff> = oc.cutoffs.iter().map(|&n| FockCutoff::new(n)).collect();
    for c in &cutoffs {
        c.validate().map_err(|e| e.to_string())?;
    }
    let spec = ctx.config.model.spec_for(oc.reduced_h0, oc.reduced_l0);
    spec.validate().map_err(|e| e.to_string())?;
    let mut req = ctx.config.solver.to_request();
    req.seed = ctx.seed;
    let report = cross_check(&cutoffs, &spec, oc.k, &req).map_err(|e| e.to_string())?;

    let config_sha = sha256_hex(
        serde_json::to_string(&ctx.config)
            .map_err(|e| e.to_string())?
            .as_bytes(),
    );
    let reduced_sha = sha256_hex(
        serde_json::to_string(&(report.ground_reduced, &report.rows))
            .map_err(|e| e.to_string())?
            .as_bytes(),
    );
    let direct_sha = sha256_hex(
        serde_json::to_string(&(&report.cutoffs, &report.ground_direct))
            .map_err(|e| e.to_string())?
            .as_bytes(),
    );
    let file = OracleReportFile {
        reduced_h0: spec.h0(),
        reduced_l0: spec.l0(),
        config_sha256: config_sha,
        reduced_section_sha256: reduced_sha,
        direct_section_sha256: direct_sha,
        report,
    };
    let json_path = ctx.path("oracle.json");
    super::write_json(&json_path, &file).map_err(|e| e.to_string())?;
    let csv_path = ctx.path("oracle.csv");
    csvio::write_oracle_csv(&csv_path, &file.report.rows).map_err(|e| e.to_string())?;

    println!(
        "oracle: cutoffs {:?}, ground diff trend {:?} (non-increasing: {}), charges match: {} -> {}",
        file.report.cutoffs,
        file.report
            .ground_diff
            .iter()
            .map(|d| format!("{d:.2e}"))
            .collect::<Vec<_>>(),
        file.report.diff_nonincreasing,
        file.report.charges_match,
        json_path.display()
    );
    manifest
        .finalize(&[json_path, csv_path])
        .map_err(|e| e.to_string())
}
