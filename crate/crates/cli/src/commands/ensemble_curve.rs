//! `ensemble-curve`: gross metrics as the committee grows one member at a
//! time (members ordered by model path).

use std::path::PathBuf;

use polyscat::ensemble::{arousal_score, average_posteriors};
use polyscat::model::{forward_infer, load_model, ModelParams};
use polyscat::{Error, Result};

use crate::config::PipelineConfig;
use crate::util::{gross_report, load_all_features, ScoredRecord};

pub struct EnsembleCurveArgs {
    pub features: PathBuf,
    pub models: Vec<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn run(_config: &PipelineConfig, args: &EnsembleCurveArgs) -> Result<()> {
    let mut model_dirs = args.models.clone();
    model_dirs.sort();
    let models: Vec<ModelParams<f64>> = model_dirs
        .iter()
        .map(|dir| load_model::<f64>(dir).map(|(m, _)| m))
        .collect::<Result<_>>()?;

    let features = load_all_features(&args.features)?;
    // Cache per-member posteriors per record.
    let mut member_probs: Vec<Vec<Vec<[f64; 3]>>> = Vec::with_capacity(models.len());
    for model in &models {
        let mut per_record = Vec::with_capacity(features.len());
        for f in &features {
            let flat = forward_infer(model, &f.data)?;
            per_record.push(
                flat.chunks_exact(3)
                    .map(|c| [c[0], c[1], c[2]])
                    .collect::<Vec<[f64; 3]>>(),
            );
        }
        member_probs.push(per_record);
    }

    let mut csv = String::from("size,auroc,auprc\n");
    for size in 1..=models.len() {
        let mut scored = Vec::new();
        for (r, f) in features.iter().enumerate() {
            let members: Vec<Vec<[f64; 3]>> = member_probs[..size]
                .iter()
                .map(|per_record| per_record[r].clone())
                .collect();
            let averaged = average_posteriors(&members)?;
            scored.push(ScoredRecord {
                record_id: f.record_id.clone(),
                scores: arousal_score(&averaged),
                labels: f.frame_targets.clone(),
            });
        }
        let report = gross_report(&scored)?;
        csv.push_str(&format!("{size},{},{}\n", report.auroc, report.auprc));
    }

    if let Some(path) = &args.out {
        std::fs::write(path, &csv).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    print!("{csv}");
    Ok(())
}
