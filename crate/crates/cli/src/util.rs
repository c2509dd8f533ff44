//! Shared helpers for the subcommands.

use std::path::{Path, PathBuf};

use polyscat::scattering::ScatteringFeatures;
use polyscat::{Error, Result};

/// Subdirectories of `dir` containing `marker`, sorted by name for
/// deterministic processing order.
pub fn container_dirs(dir: &Path, marker: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        let path = entry.path();
        if path.is_dir() && path.join(marker).is_file() {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::Input(format!(
            "no containers with {marker} found under {}",
            dir.display()
        )));
    }
    Ok(out)
}

/// Loads every feature container under `dir`, sorted by directory name.
pub fn load_all_features(dir: &Path) -> Result<Vec<ScatteringFeatures<f64>>> {
    container_dirs(dir, "features.json")?
        .iter()
        .map(|d| ScatteringFeatures::load(d))
        .collect()
}

/// Loads the feature containers whose record ids appear in `ids`.
pub fn load_features_by_id(dir: &Path, ids: &[String]) -> Result<Vec<ScatteringFeatures<f64>>> {
    ids.iter()
        .map(|id| {
            let path = dir.join(id);
            if !path.join("features.json").is_file() {
                return Err(Error::Input(format!(
                    "no feature container for record {id} under {}",
                    dir.display()
                )));
            }
            ScatteringFeatures::load(&path)
        })
        .collect()
}

/// Prints a serializable summary as pretty JSON on stdout.
pub fn print_summary<S: serde::Serialize>(summary: &S) {
    println!(
        "{}",
        serde_json::to_string_pretty(summary).expect("summary serialization")
    );
}

/// `scores`/`labels` views for gross evaluation.
pub struct ScoredRecord {
    pub record_id: String,
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

pub fn gross_report(records: &[ScoredRecord]) -> Result<polyscat::metrics::MetricsReport> {
    let views: Vec<polyscat::metrics::RecordScores<'_, f64>> = records
        .iter()
        .map(|r| polyscat::metrics::RecordScores {
            record_id: &r.record_id,
            scores: &r.scores,
            frame_labels: &r.labels,
        })
        .collect();
    polyscat::metrics::gross_metrics(&views)
}
