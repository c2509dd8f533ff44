//! Multi-channel recording and its on-disk container.
//!
//! A record directory holds `header.json`, `signals.dat` (row-major
//! little-endian `f32`, samples x channels) and `targets.dat` (one byte per
//! sample: 0 PAD, 1 non-arousal, 2 arousal).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bytes;
use crate::error::{Error, Result};
use crate::num::Scalar;

pub const RECORD_FORMAT_VERSION: u32 = 1;

/// The 13-channel naming convention for overnight polysomnography.
pub fn default_channel_names() -> Vec<String> {
    [
        "F3-M2", "F4-M1", "C3-M2", "C4-M1", "O1-M2", "O2-M1", "E1-M2", "Chin1-Chin2", "ABD",
        "CHEST", "AIRFLOW", "SaO2", "ECG",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// One recording: sample matrix plus per-sample target labels.
#[derive(Debug, Clone)]
pub struct Record<T> {
    pub id: String,
    pub sample_rate: f64,
    pub channel_names: Vec<String>,
    /// `n_samples x n_channels`, row-major (sample-major).
    pub samples: Vec<T>,
    /// Per-sample labels in {0, 1, 2}.
    pub targets: Vec<u8>,
}

impl<T: Scalar> Record<T> {
    pub fn n_channels(&self) -> usize {
        self.channel_names.len()
    }

    pub fn n_samples(&self) -> usize {
        if self.channel_names.is_empty() {
            0
        } else {
            self.samples.len() / self.channel_names.len()
        }
    }

    /// Contiguous copy of one channel.
    pub fn channel(&self, idx: usize) -> Vec<T> {
        let c = self.n_channels();
        (0..self.n_samples()).map(|s| self.samples[s * c + idx]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::Input(format!(
                "record {}: sample_rate must be positive",
                self.id
            )));
        }
        let c = self.n_channels();
        if c == 0 || self.samples.len() % c != 0 {
            return Err(Error::Shape(format!(
                "record {}: {} samples do not tile {} channels",
                self.id,
                self.samples.len(),
                c
            )));
        }
        if self.targets.len() != self.n_samples() {
            return Err(Error::Shape(format!(
                "record {}: {} targets for {} samples",
                self.id,
                self.targets.len(),
                self.n_samples()
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RecordHeader {
    format_version: u32,
    id: String,
    sample_rate: f64,
    channel_names: Vec<String>,
    n_samples: usize,
    n_channels: usize,
}

/// Writes the record container into `dir` (created if missing).
///
/// Samples are narrowed to `f32`; the round trip is bit-exact for data that
/// originated as 32-bit.
pub fn save_record<T: Scalar>(rec: &Record<T>, dir: &Path) -> Result<()> {
    rec.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = RecordHeader {
        format_version: RECORD_FORMAT_VERSION,
        id: rec.id.clone(),
        sample_rate: rec.sample_rate,
        channel_names: rec.channel_names.clone(),
        n_samples: rec.n_samples(),
        n_channels: rec.n_channels(),
    };
    bytes::write_json(&dir.join("header.json"), &header)?;
    bytes::write_f32(&dir.join("signals.dat"), &rec.samples)?;
    bytes::write_u8(&dir.join("targets.dat"), &rec.targets)
}

/// Loads a record container, distinguishing truncation from dimension errors.
pub fn load_record<T: Scalar>(dir: &Path) -> Result<Record<T>> {
    let header_path = dir.join("header.json");
    let header: RecordHeader = bytes::read_json(&header_path)?;
    if header.format_version != RECORD_FORMAT_VERSION {
        return Err(Error::format(
            &header_path,
            format!("unsupported format_version {}", header.format_version),
        ));
    }
    if header.channel_names.len() != header.n_channels {
        return Err(Error::Dimension {
            path: header_path,
            message: format!(
                "header lists {} channel names but n_channels = {}",
                header.channel_names.len(),
                header.n_channels
            ),
        });
    }

    let signals_path = dir.join("signals.dat");
    let actual = std::fs::metadata(&signals_path)
        .map_err(|e| Error::io(&signals_path, e))?
        .len();
    let expected = (header.n_samples * header.n_channels * 4) as u64;
    if actual != expected {
        let row_bytes = (header.n_samples * 4) as u64;
        // A whole number of sample columns of the wrong count is a layout
        // disagreement; anything else is a short/garbled file.
        if header.n_samples > 0 && actual % row_bytes == 0 {
            return Err(Error::Dimension {
                path: signals_path,
                message: format!(
                    "data width is {} channels, header says {}",
                    actual / row_bytes,
                    header.n_channels
                ),
            });
        }
        return Err(Error::Truncated {
            path: signals_path,
            expected,
            actual,
        });
    }

    let samples = bytes::read_f32(&signals_path, header.n_samples * header.n_channels)?;
    let targets = bytes::read_u8(&dir.join("targets.dat"), header.n_samples)?;
    let rec = Record {
        id: header.id,
        sample_rate: header.sample_rate,
        channel_names: header.channel_names,
        samples,
        targets,
    };
    rec.validate()?;
    Ok(rec)
}
