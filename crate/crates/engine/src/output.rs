//! CSV tables and run manifests.
//!
//! Both are written to a temporary file in the target directory and renamed
//! into place, so readers never see a partial file.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::ScanConfig;
use crate::scan::{QuadraturePowers, ScanOutput};

/// Bumped whenever the column set or its meaning changes.
pub const CSV_FORMAT_VERSION: u32 = 1;

pub const BASE_COLUMNS: [&str; 8] = ["omega", "s1_amp", "s1_phase", "s2_amp", "s2_phase", "re_corr", "im_corr", "duan_sum"];

const SPLIT_COLUMNS: [&str; 4] = ["s1_amp", "s1_phase", "s2_amp", "s2_phase"];

pub fn columns(decompose: bool) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|c| c.to_string()).collect();
    if decompose {
        for part in ["semiclassical", "quantum"] {
            cols.extend(SPLIT_COLUMNS.iter().map(|c| format!("{c}_{part}")));
        }
    }
    cols
}

fn split(p: &QuadraturePowers) -> [f64; 4] {
    [p.s1_amp, p.s1_phase, p.s2_amp, p.s2_phase]
}

/// CSV text for a finished scan. Numbers use the shortest representation
/// that round-trips, so the output is reproducible bit for bit.
pub fn csv_text(out: &ScanOutput, decompose: bool) -> String {
    let mut text = columns(decompose).join(",");
    text.push('\n');
    for row in &out.rows {
        let r = &row.record;
        let mut values = vec![r.omega, r.s1_amp, r.s1_phase, r.s2_amp, r.s2_phase, r.cross_corr.re, r.cross_corr.im, r.duan_sum];
        if decompose {
            for part in [&row.semiclassical, &row.quantum] {
                values.extend(part.as_ref().map(split).unwrap_or([f64::NAN; 4]));
            }
        }
        let line: Vec<String> = values.iter().map(|&v| number(v)).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    text
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e6)`.
fn number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn manifest(config: &ScanConfig, out: &ScanOutput, csv_path: &Path) -> Value {
    let points: Vec<Value> = out
        .points
        .iter()
        .enumerate()
        .map(|(row, p)| {
            let mut entry = json!({"row": row, "omega": p.omega, "status": if p.error.is_some() { "failed" } else { "ok" }});
            if !p.events.is_empty() {
                entry["events"] = json!(p.events);
            }
            if let Some(e) = &p.error {
                entry["error"] = json!(e);
            }
            entry
        })
        .collect();
    json!({
        "tool": "atomnoise",
        "version": env!("CARGO_PKG_VERSION"),
        "csv_format": CSV_FORMAT_VERSION,
        "csv": csv_path.display().to_string(),
        "columns": columns(config.decompose),
        "config": config.to_json(),
        "wall_time_s": out.wall_time.as_secs_f64(),
        "rows": out.rows.len(),
        "failed_rows": out.failed_points(),
        "setup_error": out.setup_error,
        "points": points,
    })
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Default manifest location: `<csv stem>.manifest.json` next to the CSV.
pub fn manifest_path_for(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scan".into());
    csv.with_file_name(format!("{stem}.manifest.json"))
}

pub fn write_outputs(config: &ScanConfig, out: &ScanOutput, csv: &Path, manifest_path: &Path) -> io::Result<()> {
    write_atomic(csv, csv_text(out, config.decompose).as_bytes())?;
    let text = serde_json::to_string_pretty(&manifest(config, out, csv)).expect("manifest serializes");
    write_atomic(manifest_path, text.as_bytes())
}
