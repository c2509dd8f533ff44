//! Sleep-arousal detection from multi-channel physiological recordings.
//!
//! The pipeline mirrors a classic two-stage design: a multi-order wavelet
//! scattering transform turns each raw signal into a slow, translation-stable
//! feature sequence, and a stacked LSTM classifier labels every feature frame
//! as arousal / non-arousal / padding. Committees of independently trained
//! classifiers are fused by unweighted posterior averaging and scored with
//! gross (frame-pooled) AUROC and AUPRC.
//!
//! Everything numerical is generic over the scalar type via [`num::Scalar`]
//! (`f32` or `f64`); the concrete aliases below pin the 64-bit instantiations
//! used by the CLI and the verification suites. On-disk containers always
//! store 32-bit samples/features regardless of the in-memory scalar.

pub mod data;
pub mod ensemble;
pub mod error;
pub mod filterbank;
pub mod metrics;
pub mod model;
pub mod num;
pub mod scattering;
pub mod seed;

mod bytes;

pub use error::{Error, Result};
pub use num::Scalar;

/// 64-bit filter bank, the precision used by the cascade.
pub type FilterBank64 = filterbank::FilterBank<f64>;
/// 64-bit scattering feature tensor.
pub type Features64 = scattering::ScatteringFeatures<f64>;
/// 64-bit normalizer parameters.
pub type Normalizer64 = scattering::NormalizerParams<f64>;
/// 64-bit model parameters.
pub type Model64 = model::ModelParams<f64>;
/// 64-bit recording.
pub type Record64 = data::Record<f64>;
