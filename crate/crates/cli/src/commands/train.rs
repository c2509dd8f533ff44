//! `train`: fit one base classifier on a cross-validation fold.

use std::path::PathBuf;

use serde::Serialize;

use polyscat::data::{pad_features, DatasetIndex};
use polyscat::model::{
    class_weight_from_prevalence, save_model, train, write_history_csv, ModelMeta, Sequence,
};
use polyscat::scattering::ScatteringFeatures;
use polyscat::{Error, Result};

use crate::config::PipelineConfig;
use crate::util::{load_features_by_id, print_summary};

pub struct TrainArgs {
    pub features: PathBuf,
    pub index: PathBuf,
    pub fold: usize,
    pub out: PathBuf,
    /// `Some(n)` pads to n frames; `None` uses the configured max_length;
    /// `Some(0)` means auto (longest sequence in this fold).
    pub max_length: Option<usize>,
}

#[derive(Serialize)]
struct Summary {
    fold: usize,
    train_records: usize,
    val_records: usize,
    input_dim: usize,
    max_length: usize,
    class_weights: [f64; 3],
    class_weight_clamped: bool,
    epochs_run: usize,
    best_epoch: usize,
    best_val_loss: f64,
}

fn to_sequences(
    sets: Vec<ScatteringFeatures<f64>>,
    max_length: usize,
) -> Result<Vec<Sequence<f64>>> {
    sets.into_iter()
        .map(|mut f| {
            if !f.normalized {
                return Err(Error::State(format!(
                    "record {} holds raw features; run `scatter --normalize` first",
                    f.record_id
                )));
            }
            pad_features(&mut f, max_length)?;
            Ok(Sequence {
                features: f.data,
                targets: f.frame_targets,
            })
        })
        .collect()
}

pub fn run(config: &PipelineConfig, args: &TrainArgs) -> Result<()> {
    let index = DatasetIndex::load(&args.index)?;
    let roles = index.cv_roles(args.fold)?;
    let train_sets = load_features_by_id(&args.features, &roles.train)?;
    let val_sets = load_features_by_id(&args.features, &roles.val)?;

    let input_dim = train_sets
        .first()
        .map(|f| f.frame_width())
        .ok_or_else(|| Error::Training("empty training fold".into()))?;
    for f in train_sets.iter().chain(&val_sets) {
        if f.frame_width() != input_dim {
            return Err(Error::Shape(format!(
                "record {} has frame width {}, expected {input_dim}",
                f.record_id,
                f.frame_width()
            )));
        }
    }

    let longest = train_sets
        .iter()
        .chain(&val_sets)
        .map(|f| f.n_frames)
        .max()
        .unwrap_or(0);
    let max_length = match args.max_length {
        Some(0) => longest,
        Some(n) => n,
        None => config.train.max_length,
    };

    let mut train_cfg = config.train.clone();
    train_cfg.max_length = max_length;

    let mut clamped = false;
    if config.auto_class_weight {
        let pooled: Vec<u8> = train_sets
            .iter()
            .flat_map(|f| f.frame_targets.iter().copied())
            .collect();
        let derived = class_weight_from_prevalence(&pooled)?;
        train_cfg.class_weights = derived.weights;
        clamped = derived.clamped;
        if clamped {
            eprintln!(
                "note: derived arousal weight clamped to {}",
                derived.weights[2]
            );
        }
    }

    let train_seqs = to_sequences(train_sets, max_length)?;
    let val_seqs = to_sequences(val_sets, max_length)?;

    let mut model_cfg = config.model.clone();
    model_cfg.input_dim = input_dim;

    let outcome = train(&model_cfg, &train_seqs, &val_seqs, &train_cfg)?;

    save_model(
        &args.out,
        &outcome.params,
        &ModelMeta {
            epoch: outcome.best_epoch,
            val_loss: outcome.best_val_loss,
            seed: config.seed,
        },
    )?;
    write_history_csv(&args.out.join("history.csv"), &outcome.history)?;

    print_summary(&Summary {
        fold: args.fold,
        train_records: roles.train.len(),
        val_records: roles.val.len(),
        input_dim,
        max_length,
        class_weights: train_cfg.class_weights,
        class_weight_clamped: clamped,
        epochs_run: outcome.history.len(),
        best_epoch: outcome.best_epoch,
        best_val_loss: outcome.best_val_loss,
    });
    Ok(())
}
