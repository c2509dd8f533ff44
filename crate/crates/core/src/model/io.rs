//! Model container: `model.json` (config + provenance) and `model.dat`
//! (little-endian `f64`, the [`ModelParams::full_to_flat`] order: per LSTM
//! layer W, U, b; per BN layer gamma, beta, running mean, running variance;
//! dense W, b).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bytes;
use crate::error::{Error, Result};
use crate::model::{EpochStats, ModelConfig, ModelParams};
use crate::num::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Provenance of a trained model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    /// Best validation epoch the stored parameters come from.
    pub epoch: usize,
    pub val_loss: f64,
    /// Root seed of the training run.
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    format_version: u32,
    config: ModelConfig,
    epoch: usize,
    val_loss: f64,
    seed: u64,
    n_values: usize,
}

pub fn save_model<T: Scalar>(dir: &Path, model: &ModelParams<T>, meta: &ModelMeta) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let flat = model.full_to_flat();
    let header = ModelHeader {
        format_version: MODEL_FORMAT_VERSION,
        config: model.config.clone(),
        epoch: meta.epoch,
        val_loss: meta.val_loss,
        seed: meta.seed,
        n_values: flat.len(),
    };
    bytes::write_json(&dir.join("model.json"), &header)?;
    bytes::write_f64(&dir.join("model.dat"), &flat)
}

pub fn load_model<T: Scalar>(dir: &Path) -> Result<(ModelParams<T>, ModelMeta)> {
    let header_path = dir.join("model.json");
    let header: ModelHeader = bytes::read_json(&header_path)?;
    if header.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::format(
            &header_path,
            format!("unsupported format_version {}", header.format_version),
        ));
    }
    let flat: Vec<T> = bytes::read_f64(&dir.join("model.dat"), header.n_values)?;
    let model = ModelParams::full_from_flat(&header.config, &flat)?;
    Ok((
        model,
        ModelMeta {
            epoch: header.epoch,
            val_loss: header.val_loss,
            seed: header.seed,
        },
    ))
}

/// `epoch,train_loss,val_loss` CSV.
pub fn write_history_csv(path: &Path, history: &[EpochStats]) -> Result<()> {
    let mut text = String::from("epoch,train_loss,val_loss\n");
    for e in history {
        text.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, e.val_loss));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
