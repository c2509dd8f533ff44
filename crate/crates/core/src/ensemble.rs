//! Committee fusion by unweighted posterior averaging.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bytes;
use crate::error::{Error, Result};
use crate::num::{cast_usize, Scalar};

pub const PREDICTION_FORMAT_VERSION: u32 = 1;

/// Fused committee output for one record.
#[derive(Debug, Clone)]
pub struct EnsemblePrediction<T> {
    pub n_members: usize,
    /// Frame-wise mean posterior over members.
    pub averaged: Vec<[T; 3]>,
    /// Arg-max labels of the averaged posteriors.
    pub labels: Vec<u8>,
}

impl<T: Scalar> EnsemblePrediction<T> {
    pub fn fuse(members: &[Vec<[T; 3]>]) -> Result<Self> {
        let averaged = average_posteriors(members)?;
        let labels = fuse_label(&averaged);
        Ok(EnsemblePrediction {
            n_members: members.len(),
            averaged,
            labels,
        })
    }
}

/// Elementwise arithmetic mean of member posteriors.
///
/// Member values are sorted before summation, so the result is bitwise
/// independent of member order.
pub fn average_posteriors<T: Scalar>(members: &[Vec<[T; 3]>]) -> Result<Vec<[T; 3]>> {
    let first = members
        .first()
        .ok_or_else(|| Error::Input("no ensemble members".into()))?;
    let n_frames = first.len();
    for (i, m) in members.iter().enumerate() {
        if m.len() != n_frames {
            return Err(Error::Shape(format!(
                "member {i} has {} frames, member 0 has {n_frames}",
                m.len()
            )));
        }
    }
    let inv = T::one() / cast_usize(members.len());
    let mut cell = vec![T::zero(); members.len()];
    let mut out = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let mut row = [T::zero(); 3];
        for (k, slot) in row.iter_mut().enumerate() {
            for (c, m) in cell.iter_mut().zip(members) {
                *c = m[f][k];
            }
            cell.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if cell[0] == cell[cell.len() - 1] {
                // Mean of equals is the value itself, exactly.
                *slot = cell[0];
            } else {
                let mut sum = T::zero();
                for &c in cell.iter() {
                    sum += c;
                }
                *slot = sum * inv;
            }
        }
        out.push(row);
    }
    Ok(out)
}

/// Per-frame arg-max over classes; exact ties resolve toward the higher
/// class index, favoring the rare class.
pub fn fuse_label<T: Scalar>(averaged: &[[T; 3]]) -> Vec<u8> {
    averaged
        .iter()
        .map(|row| {
            let mut best = 0u8;
            for k in 1..3 {
                if row[k] >= row[best as usize] {
                    best = k as u8;
                }
            }
            best
        })
        .collect()
}

/// Continuous ranking score: the averaged Arousal (class 2) posterior.
pub fn arousal_score<T: Scalar>(averaged: &[[T; 3]]) -> Vec<T> {
    averaged.iter().map(|row| row[2]).collect()
}

#[derive(Serialize, Deserialize)]
struct PredictionHeader {
    format_version: u32,
    record_id: String,
    n_members: usize,
    frame_rate: f64,
    n_frames: usize,
}

/// Writes `pred.json` + `probs.dat` (frames x 3, little-endian `f32`).
pub fn save_prediction<T: Scalar>(
    dir: &Path,
    record_id: &str,
    frame_rate: f64,
    n_members: usize,
    probs: &[[T; 3]],
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = PredictionHeader {
        format_version: PREDICTION_FORMAT_VERSION,
        record_id: record_id.to_string(),
        n_members,
        frame_rate,
        n_frames: probs.len(),
    };
    bytes::write_json(&dir.join("pred.json"), &header)?;
    let flat: Vec<T> = probs.iter().flatten().copied().collect();
    bytes::write_f32(&dir.join("probs.dat"), &flat)
}

/// Loads a prediction container; returns `(record_id, n_members, frame_rate,
/// probs)`.
pub fn load_prediction<T: Scalar>(dir: &Path) -> Result<(String, usize, f64, Vec<[T; 3]>)> {
    let header_path = dir.join("pred.json");
    let header: PredictionHeader = bytes::read_json(&header_path)?;
    if header.format_version != PREDICTION_FORMAT_VERSION {
        return Err(Error::format(
            &header_path,
            format!("unsupported format_version {}", header.format_version),
        ));
    }
    let flat: Vec<T> = bytes::read_f32(&dir.join("probs.dat"), header.n_frames * 3)?;
    let probs = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Ok((header.record_id, header.n_members, header.frame_rate, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identical_members_reproduce_the_member() {
        let member = vec![[0.2, 0.5, 0.3], [0.7, 0.2, 0.1]];
        let averaged = average_posteriors(&vec![member.clone(); 5]).unwrap();
        assert_eq!(averaged, member);
    }

    #[test]
    fn two_member_mean() {
        let a: Vec<[f64; 3]> = vec![[0.2, 0.5, 0.3]];
        let b: Vec<[f64; 3]> = vec![[0.4, 0.1, 0.5]];
        let averaged = average_posteriors(&[a, b]).unwrap();
        for (got, want) in averaged[0].iter().zip([0.3, 0.3, 0.4]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn averaged_rows_remain_distributions() {
        let mut rng = crate::seed::rng(3, "ensemble-test");
        let members: Vec<Vec<[f64; 3]>> = (0..7)
            .map(|_| {
                (0..40)
                    .map(|_| {
                        let a: f64 = rng.random_range(0.01..1.0);
                        let b: f64 = rng.random_range(0.01..1.0);
                        let c: f64 = rng.random_range(0.01..1.0);
                        let s = a + b + c;
                        [a / s, b / s, c / s]
                    })
                    .collect()
            })
            .collect();
        for row in average_posteriors(&members).unwrap() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn member_order_never_changes_output() {
        let mut rng = crate::seed::rng(5, "ensemble-perm");
        let members: Vec<Vec<[f64; 3]>> = (0..6)
            .map(|_| {
                (0..25)
                    .map(|_| {
                        [
                            rng.random_range(0.0..1.0),
                            rng.random_range(0.0..1.0),
                            rng.random_range(0.0..1.0),
                        ]
                    })
                    .collect()
            })
            .collect();
        let forward = average_posteriors(&members).unwrap();
        let mut reversed = members.clone();
        reversed.reverse();
        let backward = average_posteriors(&reversed).unwrap();
        assert_eq!(forward, backward); // bitwise
    }

    #[test]
    fn argmax_breaks_ties_upward() {
        assert_eq!(fuse_label(&[[0.3, 0.3, 0.4f64]]), vec![2]);
        assert_eq!(fuse_label(&[[0.4, 0.3, 0.3f64]]), vec![0]);
        assert_eq!(fuse_label(&[[0.3, 0.35, 0.35f64]]), vec![2]);
        assert_eq!(fuse_label(&[[0.5, 0.5, 0.0f64]]), vec![1]);
    }

    #[test]
    fn score_is_column_two() {
        let averaged = vec![[0.3, 0.3, 0.4f64], [1.0, 0.0, 0.0]];
        assert_eq!(arousal_score(&averaged), vec![0.4, 0.0]);
    }

    #[test]
    fn shape_mismatch_and_empty_are_errors() {
        let a = vec![[0.1f64, 0.2, 0.7]];
        let b = vec![[0.1f64, 0.2, 0.7], [0.3, 0.3, 0.4]];
        assert!(matches!(
            average_posteriors(&[a, b]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            average_posteriors::<f64>(&[]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn prediction_container_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let probs = vec![[0.25f64, 0.5, 0.25], [0.125, 0.75, 0.125]];
        save_prediction(dir.path(), "rec-3", 0.390625, 4, &probs).unwrap();
        let (id, n, rate, loaded) = load_prediction::<f64>(dir.path()).unwrap();
        assert_eq!(id, "rec-3");
        assert_eq!(n, 4);
        assert_eq!(rate, 0.390625);
        assert_eq!(loaded, probs); // values chosen to be f32-exact
    }
}
