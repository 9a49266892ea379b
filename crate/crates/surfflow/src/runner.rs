use std::path::{Path, PathBuf};

use surfflow_core::cahn_hilliard::describe_failure;
use surfflow_core::sim::Simulation;

use crate::config::RunConfig;
use crate::error::{IoError, IoResult};
use crate::invariants::{first_violation, Bounds};
use crate::ledger_csv::write_ledger_csv;
use crate::manifest::{RunManifest, RunStatus};
use crate::obj::write_mesh_obj;
use crate::svg::render_timeseries_svg;

pub const LEDGER_FILE: &str = "ledger.csv";
pub const CHART_FILE: &str = "ledger.svg";

fn rel(dir: &Path, p: &Path) -> String {
    p.strip_prefix(dir).unwrap_or(p).to_string_lossy().into_owned()
}

fn snapshot(sim: &Simulation, dir: &Path) -> IoResult<Vec<PathBuf>> {
    let path = dir.join(format!("snapshot_{:06}.obj", sim.steps()));
    let phase = sim.phase();
    write_mesh_obj(sim.mesh(), sim.time(), &[("phi", &phase.phi), ("mu", &phase.mu)], &path)
}

/// Runs `config`, writing ledger, chart, snapshots and manifest into `dir`.
/// The manifest is written whatever happens; only a failure to write it is
/// returned as an error.
pub fn run_to_dir(config: &RunConfig, dir: &Path) -> IoResult<RunManifest> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write { path: dir.to_path_buf(), source })?;
    let doc = serde_json::to_value(config.to_document()).expect("config documents always serialize");
    let mut manifest = RunManifest::start(doc);
    let mut sim = match Simulation::new(config.scenario.clone()) {
        Ok(s) => s,
        Err(e) => {
            manifest.finish(RunStatus::Failed, Some(format!("setup failed: {e}")));
            manifest.write(dir)?;
            return Ok(manifest);
        }
    };

    let mut io_error: Option<IoError> = None;
    let mut written: Vec<PathBuf> = Vec::new();
    let out = &config.output;
    let mut keep = |r: IoResult<Vec<PathBuf>>, written: &mut Vec<PathBuf>| match r {
        Ok(p) => written.extend(p),
        Err(e) => {
            io_error.get_or_insert(e);
        }
    };
    if out.obj {
        keep(snapshot(&sim, dir), &mut written);
    }
    let mut last_snap = 0;
    let result = sim.run(|s, _| {
        if out.obj && out.snapshot_every > 0 && s.steps() % out.snapshot_every == 0 {
            keep(snapshot(s, dir), &mut written);
            last_snap = s.steps();
        }
    });
    if out.obj && sim.steps() != last_snap {
        keep(snapshot(&sim, dir), &mut written);
    }

    let records = sim.ledger().records();
    let ledger_path = dir.join(LEDGER_FILE);
    match write_ledger_csv(records, &ledger_path) {
        Ok(()) => manifest.ledger = Some(LEDGER_FILE.into()),
        Err(e) => {
            io_error.get_or_insert(e);
        }
    }
    if !out.svg_columns.is_empty() {
        let cols: Vec<&str> = out.svg_columns.iter().map(String::as_str).collect();
        match render_timeseries_svg(records, &cols, &dir.join(CHART_FILE)) {
            Ok(()) => manifest.chart = Some(CHART_FILE.into()),
            Err(e) => {
                io_error.get_or_insert(e);
            }
        }
    }
    manifest.snapshots = written.iter().map(|p| rel(dir, p)).collect();
    manifest.steps = sim.steps();

    let sc = &config.scenario;
    let violation = first_violation(records, sc.law.is_stationary(), sc.project_compatible, &Bounds::default());
    manifest.violated_column = violation.as_ref().map(|v| v.column.to_string());
    let (status, message) = match (&result, &violation, &io_error) {
        (Err(e), v, _) => {
            let mut m = describe_failure(e);
            if let Some(v) = v {
                m.push_str(&format!("; {v}"));
            }
            (RunStatus::Failed, Some(m))
        }
        (Ok(()), _, Some(e)) => (RunStatus::Failed, Some(format!("output failed: {e}"))),
        (Ok(()), Some(v), None) => (RunStatus::Violated, Some(v.to_string())),
        (Ok(()), None, None) => (RunStatus::Passed, None),
    };
    manifest.finish(status, message);
    manifest.write(dir)?;
    Ok(manifest)
}

/// Manifest for a run whose configuration never became valid.
pub fn record_config_failure(dir: &Path, raw: serde_json::Value, err: &IoError) -> IoResult<RunManifest> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write { path: dir.to_path_buf(), source })?;
    let mut manifest = RunManifest::start(raw);
    manifest.finish(RunStatus::Failed, Some(err.to_string()));
    manifest.write(dir)?;
    Ok(manifest)
}
