//! `predict`: per-frame posteriors from one model or a committee average.

use std::path::PathBuf;

use serde::Serialize;

use polyscat::ensemble::{average_posteriors, save_prediction};
use polyscat::model::{forward_infer, load_model, ModelParams};
use polyscat::{Error, Result};

use crate::config::PipelineConfig;
use crate::util::{load_all_features, print_summary};

pub struct PredictArgs {
    pub features: PathBuf,
    pub models: Vec<PathBuf>,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    records: usize,
    members: usize,
    out: String,
}

pub fn run(_config: &PipelineConfig, args: &PredictArgs) -> Result<()> {
    // Deterministic member order: sorted by model path.
    let mut model_dirs = args.models.clone();
    model_dirs.sort();
    let models: Vec<ModelParams<f64>> = model_dirs
        .iter()
        .map(|dir| load_model::<f64>(dir).map(|(m, _)| m))
        .collect::<Result<_>>()?;

    let features = load_all_features(&args.features)?;
    for f in &features {
        if !f.normalized {
            return Err(Error::State(format!(
                "record {} holds raw features; predict expects normalized input",
                f.record_id
            )));
        }
        let member_probs: Vec<Vec<[f64; 3]>> = models
            .iter()
            .map(|model| {
                if f.frame_width() != model.config.input_dim {
                    return Err(Error::Shape(format!(
                        "record {} frame width {} does not match model input_dim {}",
                        f.record_id,
                        f.frame_width(),
                        model.config.input_dim
                    )));
                }
                let flat = forward_infer(model, &f.data)?;
                Ok(flat
                    .chunks_exact(3)
                    .map(|c| [c[0], c[1], c[2]])
                    .collect())
            })
            .collect::<Result<_>>()?;
        let averaged = average_posteriors(&member_probs)?;
        save_prediction(
            &args.out.join(&f.record_id),
            &f.record_id,
            f.frame_rate,
            models.len(),
            &averaged,
        )?;
    }

    print_summary(&Summary {
        records: features.len(),
        members: models.len(),
        out: args.out.display().to_string(),
    });
    Ok(())
}
