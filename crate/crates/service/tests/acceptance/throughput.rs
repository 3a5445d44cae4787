use std::process::Command;

use archive_lens::{PipelineConfig, RunReport};

use crate::{common, ensure, Outcome};

const TARGET: f64 = 5000.0;

pub fn run() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = common::config_for("e2e", tmp.path());
    let out = Command::new(env!("CARGO_BIN_EXE_archive-lens"))
        .arg("--config")
        .arg(&config)
        .args(["bench", "--rounds", "20"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "bench exited with {:?}", out.status.code());
    let cfg = PipelineConfig::load(&config).map_err(|e| e.to_string())?;
    let report: RunReport =
        serde_json::from_slice(&std::fs::read(cfg.report_path()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let bench = report.bench.ok_or("report has no benchmark result")?;
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    ensure!(
        bench.lines_per_second >= TARGET,
        "{:.0} lines/s over {} lines ({profile} build), target {TARGET}",
        bench.lines_per_second,
        bench.lines
    );
    Ok(format!(
        "{:.0} lines/s on one worker over {} lines ({profile} build) >= {TARGET}",
        bench.lines_per_second, bench.lines
    ))
}
