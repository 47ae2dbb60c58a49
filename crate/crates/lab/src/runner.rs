//! Running configurations and writing their artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::LabError;
use crate::experiments::run_experiment;
use crate::report::{write_report, write_summary, ExperimentReport, SuiteSummary};

/// Environment variable overriding the configured output directory.
pub const OUT_ENV: &str = "MA_LAB_OUT";
pub const DEFAULT_OUT: &str = "ma-lab-out";

/// Output directory: the command-line flag, then `MA_LAB_OUT`, then the
/// configuration, then [`DEFAULT_OUT`].
pub fn output_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(v) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(v);
    }
    PathBuf::from(cfg.output.as_deref().unwrap_or(DEFAULT_OUT))
}

/// Run a configuration and write its artifacts under `out`. A single
/// experiment writes directly into `out`; a suite writes one subdirectory
/// per experiment plus `summary.json`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<ExperimentReport>, LabError> {
    if cfg.experiment != Experiment::Suite {
        let report = run_experiment(cfg)?;
        write_report(&report, out)?;
        return Ok(vec![report]);
    }
    let start = Instant::now();
    let mut reports = Vec::new();
    for &e in &cfg.suite {
        if e == Experiment::Suite {
            continue;
        }
        let mut sub = cfg.clone();
        sub.experiment = e;
        let report = run_experiment(&sub)?;
        write_report(&report, &out.join(e.name()))?;
        reports.push(report);
    }
    let summary = SuiteSummary::from_reports(&reports, start.elapsed().as_secs_f64());
    write_summary(&summary, out)?;
    Ok(reports)
}

/// 0 when every assertion passed, 1 otherwise.
pub fn exit_status(reports: &[ExperimentReport]) -> i32 {
    if reports.iter().all(|r| r.passed()) {
        0
    } else {
        1
    }
}
