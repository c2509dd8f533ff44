//! `synth`: generate a synthetic dataset plus its partition index.

use std::path::Path;

use serde::Serialize;

use polyscat::data::{partition, save_record, synth_generate_one, Record};
use polyscat::{Error, Result};

use crate::config::PipelineConfig;
use crate::util::print_summary;

#[derive(Serialize)]
struct Summary {
    records: usize,
    duration_s: f64,
    channels: usize,
    prevalence_target: f64,
    index_written: bool,
    out: String,
}

pub fn run(config: &PipelineConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;

    let cfg = &config.synth;
    let mut ids = Vec::with_capacity(cfg.n_records);
    for idx in 0..cfg.n_records {
        let (rec, _): (Record<f64>, _) = synth_generate_one(cfg, idx)?;
        save_record(&rec, &out.join(&rec.id))?;
        ids.push(rec.id);
    }

    // The ten-fold index needs at least 12 records; smaller datasets are
    // still usable for scatter/predict experiments.
    let index_written = if ids.len() >= 12 {
        let index = partition(&ids, config.partition_seed())?;
        index.save(&out.join("index.json"))?;
        true
    } else {
        eprintln!(
            "note: {} records are too few for the 10-fold index (need 12); skipping index.json",
            ids.len()
        );
        false
    };

    print_summary(&Summary {
        records: ids.len(),
        duration_s: cfg.duration_s,
        channels: cfg.channels.len(),
        prevalence_target: cfg.prevalence,
        index_written,
        out: out.display().to_string(),
    });
    Ok(())
}
