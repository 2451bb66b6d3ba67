//! CSV readers/writers: RFC-4180, `.` decimal separator, 17 significant
//! digits on floats.

use std::fs;
use std::io::Write;
use std::path::Path;

use ymqm_core::spectrum::SpectralRecord;

/// 17 significant digits, scientific: round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SPECTRUM_HEADER: &str = "q,n,E,size,q_quality,degenerate_pair,residual";

pub fn write_spectrum_csv(path: &Path, records: &[SpectralRecord]) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{SPECTRUM_HEADER}")?;
    for r in records {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.q_abs,
            r.n,
            fmt_f64(r.energy),
            fmt_f64(r.size),
            fmt_f64(r.q_quality),
            r.degenerate_pair,
            fmt_f64(r.residual)
        )?;
    }
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> Result<Vec<SpectralRecord>, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty spectrum file")?;
    if header.trim() != SPECTRUM_HEADER {
        return Err(format!("unexpected spectrum header: {header}"));
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format!("line {}: expected 7 fields", idx + 2));
        }
        let parse_f = |s: &str| -> Result<f64, String> {
            s.parse::<f64>().map_err(|e| format!("line {}: {e}", idx + 2))
        };
        out.push(SpectralRecord {
            q_abs: fields[0]
                .parse()
                .map_err(|e| format!("line {}: {e}", idx + 2))?,
            n: fields[1]
                .parse()
                .map_err(|e| format!("line {}: {e}", idx + 2))?,
            energy: parse_f(fields[2])?,
            size: parse_f(fields[3])?,
            q_quality: parse_f(fields[4])?,
            degenerate_pair: fields[5] == "true",
            residual: parse_f(fields[6])?,
        });
    }
    Ok(out)
}

pub const TRAJECTORY_HEADER: &str = "t,deviation,certified_bound,paper_bound";

pub fn write_trajectory_csv(
    path: &Path,
    times: &[f64],
    deviation: &[f64],
    certified: &[f64],
    paper: &[f64],
) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{TRAJECTORY_HEADER}")?;
    for i in 0..times.len() {
        writeln!(
            f,
            "{},{},{},{}",
            fmt_f64(times[i]),
            fmt_f64(deviation[i]),
            fmt_f64(certified[i]),
            fmt_f64(paper[i])
        )?;
    }
    Ok(())
}

pub const ORACLE_HEADER: &str = "level,E_reduced,E_direct,q_reduced,q_direct,diff";

pub fn write_oracle_csv(
    path: &Path,
    rows: &[ymqm_core::oracle::CrossRow],
) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{ORACLE_HEADER}")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            r.level,
            fmt_f64(r.e_reduced),
            fmt_f64(r.e_direct),
            r.q_reduced,
            r.q_direct,
            fmt_f64(r.diff)
        )?;
    }
    Ok(())
}
