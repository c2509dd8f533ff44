//! Scattering feature tensor and its on-disk container.
//!
//! A feature set is a directory holding `features.json` (layout and
//! provenance), `features.dat` (row-major little-endian `f32`, frames x
//! channels x paths) and `frame_targets.dat` (one byte per frame: 0 PAD,
//! 1 non-arousal, 2 arousal).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bytes;
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::scattering::path::ScatteringPath;

pub const FEATURES_FORMAT_VERSION: u32 = 1;

/// Decimated scattering coefficients of one record.
#[derive(Debug, Clone)]
pub struct ScatteringFeatures<T> {
    pub record_id: String,
    pub n_frames: usize,
    pub channel_names: Vec<String>,
    /// Global path ordering shared by every channel.
    pub paths: Vec<ScatteringPath>,
    /// Output rate in Hz (`sample_rate / averaging_window`).
    pub frame_rate: f64,
    /// Whether log-median normalization has been applied.
    pub normalized: bool,
    /// `n_frames x n_channels x n_paths`, row-major.
    pub data: Vec<T>,
    /// Per-frame labels decimated from the per-sample targets.
    pub frame_targets: Vec<u8>,
}

impl<T: Scalar> ScatteringFeatures<T> {
    pub fn n_channels(&self) -> usize {
        self.channel_names.len()
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    /// Input width per frame when flattened channel-major for the classifier.
    pub fn frame_width(&self) -> usize {
        self.n_channels() * self.n_paths()
    }

    pub fn at(&self, frame: usize, channel: usize, path: usize) -> T {
        self.data[(frame * self.n_channels() + channel) * self.n_paths() + path]
    }

    /// One frame as a contiguous channel-major slice of length
    /// `n_channels * n_paths`.
    pub fn frame(&self, frame: usize) -> &[T] {
        let w = self.frame_width();
        &self.data[frame * w..(frame + 1) * w]
    }

    /// Same layout check used by the normalizer and the model input stage.
    pub fn same_layout(&self, other: &Self) -> bool {
        self.channel_names == other.channel_names && self.paths == other.paths
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.n_frames * self.frame_width();
        if self.data.len() != expected {
            return Err(Error::Shape(format!(
                "feature tensor holds {} values, layout implies {}",
                self.data.len(),
                expected
            )));
        }
        if self.frame_targets.len() != self.n_frames {
            return Err(Error::Shape(format!(
                "{} frame targets for {} frames",
                self.frame_targets.len(),
                self.n_frames
            )));
        }
        Ok(())
    }

    /// Writes the three-file container into `dir` (created if missing).
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.validate()?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let header = FeaturesHeader {
            format_version: FEATURES_FORMAT_VERSION,
            record_id: self.record_id.clone(),
            frame_rate: self.frame_rate,
            channel_names: self.channel_names.clone(),
            paths: self.paths.iter().map(|p| p.to_triple()).collect(),
            normalized: self.normalized,
            n_frames: self.n_frames,
            n_channels: self.n_channels(),
            n_paths: self.n_paths(),
        };
        bytes::write_json(&dir.join("features.json"), &header)?;
        bytes::write_f32(&dir.join("features.dat"), &self.data)?;
        bytes::write_u8(&dir.join("frame_targets.dat"), &self.frame_targets)
    }

    /// Loads a container written by [`ScatteringFeatures::save`].
    pub fn load(dir: &Path) -> Result<Self> {
        let header_path = dir.join("features.json");
        let header: FeaturesHeader = bytes::read_json(&header_path)?;
        if header.format_version != FEATURES_FORMAT_VERSION {
            return Err(Error::format(
                &header_path,
                format!("unsupported format_version {}", header.format_version),
            ));
        }
        if header.channel_names.len() != header.n_channels
            || header.paths.len() != header.n_paths
        {
            return Err(Error::Dimension {
                path: header_path,
                message: format!(
                    "header counts ({} channels, {} paths) disagree with lists ({}, {})",
                    header.n_channels,
                    header.n_paths,
                    header.channel_names.len(),
                    header.paths.len()
                ),
            });
        }
        let paths = header
            .paths
            .iter()
            .map(|&t| ScatteringPath::from_triple(t))
            .collect::<Result<Vec<_>>>()?;
        let data = bytes::read_f32(
            &dir.join("features.dat"),
            header.n_frames * header.n_channels * header.n_paths,
        )?;
        let frame_targets = bytes::read_u8(&dir.join("frame_targets.dat"), header.n_frames)?;
        let features = ScatteringFeatures {
            record_id: header.record_id,
            n_frames: header.n_frames,
            channel_names: header.channel_names,
            paths,
            frame_rate: header.frame_rate,
            normalized: header.normalized,
            data,
            frame_targets,
        };
        features.validate()?;
        Ok(features)
    }
}

#[derive(Serialize, Deserialize)]
struct FeaturesHeader {
    format_version: u32,
    record_id: String,
    frame_rate: f64,
    channel_names: Vec<String>,
    paths: Vec<[i64; 3]>,
    normalized: bool,
    n_frames: usize,
    n_channels: usize,
    n_paths: usize,
}

/// Decimates per-sample labels to one label per window of `window` samples.
///
/// A window is Arousal (2) when at least half of its non-PAD samples are
/// arousal (exact ties go to 2), Non-arousal (1) when any non-PAD sample is
/// present, and PAD (0) otherwise. A trailing partial window is labeled from
/// the samples it has.
pub fn frame_labels(targets: &[u8], window: usize) -> Result<Vec<u8>> {
    if let Some(i) = targets.iter().position(|&t| t > 2) {
        return Err(Error::Input(format!(
            "unknown label value {} at sample {i}",
            targets[i]
        )));
    }
    let n_frames = targets.len().div_ceil(window);
    let mut out = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let chunk = &targets[f * window..((f + 1) * window).min(targets.len())];
        let non_pad = chunk.iter().filter(|&&t| t != 0).count();
        let arousal = chunk.iter().filter(|&&t| t == 2).count();
        out.push(if non_pad == 0 {
            0
        } else if 2 * arousal >= non_pad {
            2
        } else {
            1
        });
    }
    Ok(out)
}
