//! `evaluate`: gross AUROC/AUPRC over stored predictions.

use std::path::{Path, PathBuf};

use polyscat::ensemble::{arousal_score, load_prediction};
use polyscat::metrics::MetricsReport;
use polyscat::scattering::ScatteringFeatures;
use polyscat::{Error, Result};

use crate::config::PipelineConfig;
use crate::util::{container_dirs, gross_report, print_summary, ScoredRecord};

pub struct EvaluateArgs {
    pub predictions: PathBuf,
    pub features: PathBuf,
    pub out: Option<PathBuf>,
    pub curves: Option<PathBuf>,
}

pub fn run(_config: &PipelineConfig, args: &EvaluateArgs) -> Result<()> {
    let mut scored = Vec::new();
    for dir in container_dirs(&args.predictions, "pred.json")? {
        let (record_id, _, _, probs) = load_prediction::<f64>(&dir)?;
        let features = ScatteringFeatures::<f64>::load(&args.features.join(&record_id))?;
        if features.n_frames != probs.len() {
            return Err(Error::Shape(format!(
                "record {record_id}: {} predicted frames vs {} feature frames",
                probs.len(),
                features.n_frames
            )));
        }
        scored.push(ScoredRecord {
            record_id,
            scores: arousal_score(&probs),
            labels: features.frame_targets,
        });
    }

    let report = gross_report(&scored)?;
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&report).expect("report serialization");
        std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    if let Some(dir) = &args.curves {
        write_curves(dir, &report)?;
    }
    print_summary(&report);
    Ok(())
}

fn write_curves(dir: &Path, report: &MetricsReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut roc = String::from("fpr,tpr\n");
    for (fpr, tpr) in &report.roc_points {
        roc.push_str(&format!("{fpr},{tpr}\n"));
    }
    let roc_path = dir.join("roc.csv");
    std::fs::write(&roc_path, roc).map_err(|e| Error::Io {
        path: roc_path.clone(),
        source: e,
    })?;

    let mut pr = String::from("recall,precision\n");
    for (recall, precision) in &report.pr_points {
        pr.push_str(&format!("{recall},{precision}\n"));
    }
    let pr_path = dir.join("pr.csv");
    std::fs::write(&pr_path, pr).map_err(|e| Error::Io {
        path: pr_path.clone(),
        source: e,
    })
}
