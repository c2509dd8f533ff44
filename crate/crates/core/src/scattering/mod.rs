//! Multi-order scattering transform: cascade, path bookkeeping, feature
//! container, and log-median normalization.

mod features;
mod normalize;
mod path;
mod transform;

pub use features::{frame_labels, ScatteringFeatures};
pub use normalize::{fit_normalizer, NormalizerParams};
pub use path::{enumerate_paths, path_count, ScatteringPath};
pub use transform::{scatter_channel, scatter_record, ChannelCoeffs};
