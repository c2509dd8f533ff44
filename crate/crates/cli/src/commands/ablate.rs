//! `ablate`: the signal-group experiment — train and score one classifier
//! per channel group on a single fold, emitting a CSV of gross metrics.

use std::path::PathBuf;

use polyscat::data::DatasetIndex;
use polyscat::ensemble::{arousal_score, load_prediction};
use polyscat::{Error, Result};

use crate::commands::{predict, scatter, train};
use crate::config::PipelineConfig;
use crate::util::{container_dirs, gross_report, ScoredRecord};

pub struct AblateArgs {
    pub records: PathBuf,
    pub index: PathBuf,
    pub fold: usize,
    pub out: PathBuf,
}

fn dir_name(group: &str) -> String {
    group
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn run(config: &PipelineConfig, args: &AblateArgs) -> Result<()> {
    let index = DatasetIndex::load(&args.index)?;
    let roles = index.cv_roles(args.fold)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;

    let mut csv = String::from("group,auroc,auprc\n");
    for group in config.groups.names() {
        let work = args.out.join(dir_name(&group));
        let features_dir = work.join("features");
        scatter::run(
            config,
            &scatter::ScatterArgs {
                records: args.records.clone(),
                out: features_dir.clone(),
                channels: Some(group.clone()),
                normalize: true,
                index: Some(args.index.clone()),
                fold: Some(args.fold),
                normalizer: None,
            },
        )?;

        let model_dir = work.join("model");
        train::run(
            config,
            &train::TrainArgs {
                features: features_dir.clone(),
                index: args.index.clone(),
                fold: args.fold,
                out: model_dir.clone(),
                max_length: Some(0), // auto
            },
        )?;

        // Score the fold's test records.
        let test_features = work.join("test-features");
        std::fs::create_dir_all(&test_features).map_err(|e| Error::Io {
            path: test_features.clone(),
            source: e,
        })?;
        for id in &roles.test {
            let src = features_dir.join(id);
            let dst = test_features.join(id);
            copy_container(&src, &dst)?;
        }
        let pred_dir = work.join("pred");
        predict::run(
            config,
            &predict::PredictArgs {
                features: test_features.clone(),
                models: vec![model_dir],
                out: pred_dir.clone(),
            },
        )?;

        let mut scored = Vec::new();
        for dir in container_dirs(&pred_dir, "pred.json")? {
            let (record_id, _, _, probs) = load_prediction::<f64>(&dir)?;
            let features =
                polyscat::scattering::ScatteringFeatures::<f64>::load(&features_dir.join(&record_id))?;
            scored.push(ScoredRecord {
                record_id,
                scores: arousal_score(&probs),
                labels: features.frame_targets,
            });
        }
        let report = gross_report(&scored)?;
        csv.push_str(&format!("{group},{},{}\n", report.auroc, report.auprc));
    }

    let csv_path = args.out.join("ablation.csv");
    std::fs::write(&csv_path, &csv).map_err(|e| Error::Io {
        path: csv_path.clone(),
        source: e,
    })?;
    print!("{csv}");
    Ok(())
}

fn copy_container(src: &std::path::Path, dst: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dst).map_err(|e| Error::Io {
        path: dst.to_path_buf(),
        source: e,
    })?;
    for entry in std::fs::read_dir(src).map_err(|e| Error::Io {
        path: src.to_path_buf(),
        source: e,
    })? {
        let entry = entry.map_err(|e| Error::Io {
            path: src.to_path_buf(),
            source: e,
        })?;
        let to = dst.join(entry.file_name());
        std::fs::copy(entry.path(), &to).map_err(|e| Error::Io {
            path: to,
            source: e,
        })?;
    }
    Ok(())
}
