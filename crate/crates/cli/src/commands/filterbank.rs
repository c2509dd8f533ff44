//! `filterbank dump`: write every spectrum plus a JSON manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;

use polyscat::filterbank::FilterBank;
use polyscat::{Error, Result};

use crate::config::PipelineConfig;
use crate::util::print_summary;

pub struct DumpArgs {
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Manifest {
    format_version: u32,
    sample_rate: f64,
    fft_len: usize,
    n_filters: usize,
    centers_hz: Vec<f64>,
    frame_bounds: (f64, f64),
    low_pass_file: String,
    band_pass_files: Vec<String>,
}

fn write_f64_le(path: &Path, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn run(config: &PipelineConfig, args: &DumpArgs) -> Result<()> {
    let bank = FilterBank::<f64>::build(config.filterbank.clone())?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;

    write_f64_le(&args.out.join("phi.f64"), &bank.low_pass)?;
    let mut band_pass_files = Vec::new();
    for (j, bp) in bank.band_pass.iter().enumerate() {
        let name = format!("psi_{j:02}.f64");
        write_f64_le(&args.out.join(&name), &bp.spectrum)?;
        band_pass_files.push(name);
    }

    let manifest = Manifest {
        format_version: 1,
        sample_rate: bank.config.sample_rate,
        fft_len: bank.config.fft_len,
        n_filters: bank.n_filters(),
        centers_hz: bank.centers_hz().to_vec(),
        frame_bounds: bank.frame_bounds,
        low_pass_file: "phi.f64".into(),
        band_pass_files,
    };
    let manifest_path = args.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    std::fs::write(&manifest_path, text).map_err(|e| Error::Io {
        path: manifest_path.clone(),
        source: e,
    })?;

    print_summary(&manifest);
    Ok(())
}
