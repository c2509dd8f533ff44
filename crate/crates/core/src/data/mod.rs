//! Recording containers, dataset partitioning, feature padding, and the
//! synthetic generator used for desk-scale end-to-end runs.

mod groups;
mod partition;
mod record;
mod synth;

pub use groups::{select_channels, ChannelGroups};
pub use partition::{partition, DatasetIndex, FoldRoles};
pub use record::{default_channel_names, load_record, save_record, Record};
pub use synth::{
    synth_generate, synth_generate_one, synth_generate_with_events, ArousalEvent, ChannelModel,
    SynthConfig,
};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::scattering::ScatteringFeatures;

/// Appends zero-feature frames labeled PAD until the sequence reaches
/// `max_length` frames. Longer sequences are an error, never truncated.
pub fn pad_features<T: Scalar>(
    features: &mut ScatteringFeatures<T>,
    max_length: usize,
) -> Result<()> {
    if features.n_frames > max_length {
        return Err(Error::Length(format!(
            "record {} has {} frames, exceeding max_length {}",
            features.record_id, features.n_frames, max_length
        )));
    }
    let extra = max_length - features.n_frames;
    if extra == 0 {
        return Ok(());
    }
    features
        .data
        .extend(std::iter::repeat(T::zero()).take(extra * features.frame_width()));
    features.frame_targets.extend(std::iter::repeat(0).take(extra));
    features.n_frames = max_length;
    Ok(())
}
