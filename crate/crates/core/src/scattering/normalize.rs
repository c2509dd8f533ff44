//! Log-median quasi-normalization of raw scattering coefficients.
//!
//! Raw coefficients have long-tailed distributions; each `(channel, path)`
//! cell is rescaled by its training median and compressed as
//! `x' = log1p(mu * x / median)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bytes;
use crate::error::{Error, Result};
use crate::num::{cast, Scalar};
use crate::scattering::features::ScatteringFeatures;
use crate::scattering::path::ScatteringPath;

pub const NORMALIZER_FORMAT_VERSION: u32 = 1;

/// Fitted normalization parameters.
#[derive(Debug, Clone)]
pub struct NormalizerParams<T> {
    /// Per-`(channel, path)` training median, floored at `eps`;
    /// `n_channels x n_paths`, row-major.
    pub medians: Vec<T>,
    /// Per-path positive constant.
    pub mu: Vec<T>,
    /// Median floor guarding silent channels.
    pub eps: T,
    pub channel_names: Vec<String>,
    pub paths: Vec<ScatteringPath>,
}

/// Pools every training frame per `(channel, path)` cell and takes the
/// median, floored at `eps`. `mu` defaults to 1.0 for every path.
pub fn fit_normalizer<T: Scalar>(
    train: &[&ScatteringFeatures<T>],
    mu: Option<&[T]>,
    eps: T,
) -> Result<NormalizerParams<T>> {
    if train.is_empty() {
        return Err(Error::Fit("empty training set".into()));
    }
    if !(eps > T::zero()) {
        return Err(Error::Config(format!("median floor eps must be positive, got {eps}")));
    }
    let first = train[0];
    for set in train {
        if set.normalized {
            return Err(Error::State(format!(
                "record {} is already normalized; fit requires raw features",
                set.record_id
            )));
        }
        if !set.same_layout(first) {
            return Err(Error::Shape(format!(
                "record {} has a different channel/path layout than {}",
                set.record_id, first.record_id
            )));
        }
    }
    let n_channels = first.n_channels();
    let n_paths = first.n_paths();
    let mu = match mu {
        Some(values) => {
            if values.len() != n_paths {
                return Err(Error::Shape(format!(
                    "{} mu constants for {} paths",
                    values.len(),
                    n_paths
                )));
            }
            if let Some(bad) = values.iter().find(|&&m| !(m > T::zero())) {
                return Err(Error::Config(format!("mu constants must be positive, got {bad}")));
            }
            values.to_vec()
        }
        None => vec![T::one(); n_paths],
    };

    let total_frames: usize = train.iter().map(|s| s.n_frames).sum();
    let mut medians = vec![T::zero(); n_channels * n_paths];
    let mut pool: Vec<T> = Vec::with_capacity(total_frames);
    for c in 0..n_channels {
        for p in 0..n_paths {
            pool.clear();
            for set in train {
                pool.extend((0..set.n_frames).map(|f| set.at(f, c, p)));
            }
            medians[c * n_paths + p] = median(&mut pool).max(eps);
        }
    }

    Ok(NormalizerParams {
        medians,
        mu,
        eps,
        channel_names: first.channel_names.clone(),
        paths: first.paths.clone(),
    })
}

/// Median via selection; even-length pools average the two central values.
fn median<T: Scalar>(values: &mut [T]) -> T {
    let n = values.len();
    debug_assert!(n > 0);
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let (_, lower, _) =
            values.select_nth_unstable_by(mid - 1, |a, b| a.partial_cmp(b).unwrap());
        (*lower + upper) / cast(2.0)
    }
}

impl<T: Scalar> NormalizerParams<T> {
    /// Applies `x' = log1p(mu * x / median)` elementwise, consuming the raw
    /// features. Applying twice is a state error, mismatched layouts a shape
    /// error.
    pub fn apply(&self, mut features: ScatteringFeatures<T>) -> Result<ScatteringFeatures<T>> {
        if features.normalized {
            return Err(Error::State(format!(
                "record {} is already normalized",
                features.record_id
            )));
        }
        if features.channel_names != self.channel_names || features.paths != self.paths {
            return Err(Error::Shape(format!(
                "record {} layout does not match the fitted normalizer",
                features.record_id
            )));
        }
        let n_channels = features.n_channels();
        let n_paths = features.n_paths();
        for f in 0..features.n_frames {
            for c in 0..n_channels {
                let row = (f * n_channels + c) * n_paths;
                for p in 0..n_paths {
                    let x = features.data[row + p];
                    let med = self.medians[c * n_paths + p];
                    features.data[row + p] = (self.mu[p] * x / med).ln_1p();
                }
            }
        }
        features.normalized = true;
        Ok(features)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = NormalizerFile {
            format_version: NORMALIZER_FORMAT_VERSION,
            channel_names: self.channel_names.clone(),
            paths: self.paths.iter().map(|p| p.to_triple()).collect(),
            medians: self
                .medians
                .chunks(self.paths.len())
                .map(|row| row.iter().map(|v| v.to_f64().unwrap()).collect())
                .collect(),
            mu: self.mu.iter().map(|v| v.to_f64().unwrap()).collect(),
            eps: self.eps.to_f64().unwrap(),
        };
        bytes::write_json(path, &file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: NormalizerFile = bytes::read_json(path)?;
        if file.format_version != NORMALIZER_FORMAT_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported format_version {}", file.format_version),
            ));
        }
        let paths = file
            .paths
            .iter()
            .map(|&t| ScatteringPath::from_triple(t))
            .collect::<Result<Vec<_>>>()?;
        if file.medians.len() != file.channel_names.len()
            || file.medians.iter().any(|row| row.len() != paths.len())
            || file.mu.len() != paths.len()
        {
            return Err(Error::Dimension {
                path: path.to_path_buf(),
                message: "median/mu tables do not match channel and path lists".into(),
            });
        }
        Ok(NormalizerParams {
            medians: file
                .medians
                .iter()
                .flat_map(|row| row.iter().map(|&v| cast(v)))
                .collect(),
            mu: file.mu.iter().map(|&v| cast(v)).collect(),
            eps: cast(file.eps),
            channel_names: file.channel_names,
            paths,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct NormalizerFile {
    format_version: u32,
    channel_names: Vec<String>,
    paths: Vec<[i64; 3]>,
    medians: Vec<Vec<f64>>,
    mu: Vec<f64>,
    eps: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(values: &[f64], record_id: &str) -> ScatteringFeatures<f64> {
        ScatteringFeatures {
            record_id: record_id.into(),
            n_frames: values.len(),
            channel_names: vec!["A".into()],
            paths: vec![ScatteringPath::Order1 { first: 0 }],
            frame_rate: 0.390625,
            normalized: false,
            data: values.to_vec(),
            frame_targets: vec![1; values.len()],
        }
    }

    #[test]
    fn constant_value_gives_that_median() {
        let set = toy(&[4.0, 4.0, 4.0], "r0");
        let norm = fit_normalizer(&[&set], None, 1e-12).unwrap();
        assert_eq!(norm.medians, vec![4.0]);
    }

    #[test]
    fn zero_features_floor_to_eps() {
        let set = toy(&[0.0, 0.0, 0.0, 0.0], "r0");
        let norm = fit_normalizer(&[&set], None, 1e-12).unwrap();
        assert_eq!(norm.medians, vec![1e-12]);
    }

    #[test]
    fn pooled_median_matches_sort_oracle() {
        let a = toy(&[5.0, 1.0, 3.0], "a");
        let b = toy(&[4.0, 2.0], "b");
        let norm = fit_normalizer(&[&a, &b], None, 1e-12).unwrap();
        let mut pooled = vec![5.0, 1.0, 3.0, 4.0, 2.0];
        pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(norm.medians[0], pooled[pooled.len() / 2]);

        let c = toy(&[1.0, 2.0, 3.0, 10.0], "c");
        let norm = fit_normalizer(&[&c], None, 1e-12).unwrap();
        assert_eq!(norm.medians[0], 2.5);
    }

    #[test]
    fn apply_matches_formula() {
        let set = toy(&[2.0, 0.0, 6.0], "r0");
        let mut norm = fit_normalizer(&[&set], None, 1e-12).unwrap();
        assert_eq!(norm.medians, vec![2.0]);
        let out = norm.apply(set.clone()).unwrap();
        assert!((out.data[0] - 2f64.ln()).abs() < 1e-15); // x = median -> log1p(1)
        assert_eq!(out.data[1], 0.0); // x = 0 -> log1p(0)

        norm.mu = vec![2.0];
        let out = norm.apply(set).unwrap();
        assert!((out.data[2] - 7f64.ln()).abs() < 1e-15); // x = 3*median, mu = 2 -> log1p(6)
        assert!((out.data[2] - 1.945910149).abs() < 1e-9);
    }

    #[test]
    fn double_normalization_is_a_state_error() {
        let set = toy(&[1.0, 2.0], "r0");
        let norm = fit_normalizer(&[&set], None, 1e-12).unwrap();
        let once = norm.apply(set).unwrap();
        assert!(matches!(norm.apply(once), Err(Error::State(_))));
    }

    #[test]
    fn layout_mismatch_is_a_shape_error() {
        let set = toy(&[1.0, 2.0], "r0");
        let norm = fit_normalizer(&[&set], None, 1e-12).unwrap();
        let mut other = toy(&[1.0, 2.0], "r1");
        other.channel_names = vec!["B".into()];
        assert!(matches!(norm.apply(other), Err(Error::Shape(_))));
    }

    #[test]
    fn empty_training_set_is_a_fit_error() {
        assert!(matches!(
            fit_normalizer::<f64>(&[], None, 1e-12),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn params_round_trip_through_json() {
        let set = toy(&[1.0, 2.0, 3.0], "r0");
        let norm = fit_normalizer(&[&set], None, 1e-12).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("normalizer.json");
        norm.save(&path).unwrap();
        let loaded = NormalizerParams::<f64>::load(&path).unwrap();
        assert_eq!(loaded.medians, norm.medians);
        assert_eq!(loaded.mu, norm.mu);
        assert_eq!(loaded.paths, norm.paths);
    }
}
