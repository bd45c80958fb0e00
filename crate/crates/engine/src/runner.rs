//! Output placement and the top-level run loop used by the CLI.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::config::{ConfigError, ConfigFile, ScanConfig};
use crate::output::{manifest_path_for, write_outputs};
use crate::scan::{run_scan, ScanOutput};

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub config: ScanConfig,
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

/// Resolves where each run writes. For a single run `out` names the CSV
/// file; for multi-run files it names the directory holding
/// `<label>.csv` files. `stem` names single runs that carry no label.
pub fn plan_outputs(file: &ConfigFile, out: Option<&Path>, stem: &str) -> Result<Vec<RunPlan>, Vec<ConfigError>> {
    let mut plans = Vec::with_capacity(file.runs.len());
    for run in &file.runs {
        let (csv, manifest) = if file.multi {
            let dir = out.unwrap_or(Path::new("."));
            let label = run.label.as_deref().expect("multi-run labels are validated");
            let csv = dir.join(run.outputs.csv.clone().unwrap_or_else(|| PathBuf::from(format!("{label}.csv"))));
            let manifest = run.outputs.manifest.as_ref().map(|m| dir.join(m));
            (csv, manifest)
        } else {
            let csv = out
                .map(Path::to_path_buf)
                .or_else(|| run.outputs.csv.clone())
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", run.label.as_deref().unwrap_or(stem))));
            (csv, run.outputs.manifest.clone())
        };
        let manifest = manifest.unwrap_or_else(|| manifest_path_for(&csv));
        plans.push(RunPlan {
            config: run.clone(),
            csv,
            manifest,
        });
    }
    let mut seen = BTreeSet::new();
    let mut errors = Vec::new();
    for (i, plan) in plans.iter().enumerate() {
        for path in [&plan.csv, &plan.manifest] {
            if !seen.insert(path.clone()) {
                errors.push(ConfigError {
                    path: if file.multi { format!("runs[{i}].outputs") } else { "outputs".into() },
                    message: format!("output path {} is used twice", path.display()),
                });
            }
        }
    }
    if errors.is_empty() {
        Ok(plans)
    } else {
        Err(errors)
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub plan: RunPlan,
    pub output: ScanOutput,
}

/// Scans and writes every planned run in order.
pub fn execute(plans: &[RunPlan]) -> std::io::Result<Vec<RunSummary>> {
    let mut done = Vec::with_capacity(plans.len());
    for plan in plans {
        let output = run_scan(&plan.config);
        write_outputs(&plan.config, &output, &plan.csv, &plan.manifest)?;
        log::info!(
            "{}: {} rows, {} failed, {:.2} s",
            plan.csv.display(),
            output.rows.len(),
            output.failed_points(),
            output.wall_time.as_secs_f64()
        );
        done.push(RunSummary { plan: plan.clone(), output });
    }
    Ok(done)
}
