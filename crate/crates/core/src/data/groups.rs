//! Named channel groups for signal-group ablation runs.

use serde::{Deserialize, Serialize};

use crate::data::record::Record;
use crate::error::{Error, Result};
use crate::num::Scalar;

/// Named sets of channels. The defaults follow the 13-channel convention:
/// the EEG group is the six EEG derivations, and the EMG group is the chin
/// derivation (the only EMG channel in the montage).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelGroups {
    pub groups: Vec<(String, Vec<String>)>,
}

impl Default for ChannelGroups {
    fn default() -> Self {
        let g = |name: &str, channels: &[&str]| {
            (
                name.to_string(),
                channels.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            )
        };
        ChannelGroups {
            groups: vec![
                g(
                    "All",
                    &[
                        "F3-M2",
                        "F4-M1",
                        "C3-M2",
                        "C4-M1",
                        "O1-M2",
                        "O2-M1",
                        "E1-M2",
                        "Chin1-Chin2",
                        "ABD",
                        "CHEST",
                        "AIRFLOW",
                        "SaO2",
                        "ECG",
                    ],
                ),
                g("All EMG", &["Chin1-Chin2"]),
                g("SaO2", &["SaO2"]),
                g(
                    "All EEG",
                    &["F3-M2", "F4-M1", "C3-M2", "C4-M1", "O1-M2", "O2-M1"],
                ),
                g("F3-M2", &["F3-M2"]),
                g("ECG", &["ECG"]),
                g("AIRFLOW", &["AIRFLOW"]),
            ],
        }
    }
}

impl ChannelGroups {
    /// Channel list of a named group; single channel names fall through as
    /// one-channel groups.
    pub fn resolve(&self, name: &str) -> Option<Vec<String>> {
        self.groups
            .iter()
            .find(|(g, _)| g == name)
            .map(|(_, channels)| channels.clone())
    }

    /// Names in configured order (ablation row order).
    pub fn names(&self) -> Vec<String> {
        self.groups.iter().map(|(g, _)| g.clone()).collect()
    }
}

/// Restricts a record to the channels of `group`, preserving the record's
/// channel order. `group` may also be a plain channel name.
pub fn select_channels<T: Scalar>(
    rec: &Record<T>,
    group: &str,
    groups: &ChannelGroups,
) -> Result<Record<T>> {
    let wanted = match groups.resolve(group) {
        Some(channels) => channels,
        None if rec.channel_names.iter().any(|c| c == group) => vec![group.to_string()],
        None => return Err(Error::Lookup(group.to_string())),
    };
    for name in &wanted {
        if !rec.channel_names.iter().any(|c| c == name) {
            return Err(Error::Lookup(format!(
                "channel {name} (group {group}) not present in record {}",
                rec.id
            )));
        }
    }

    let keep: Vec<usize> = rec
        .channel_names
        .iter()
        .enumerate()
        .filter(|(_, name)| wanted.contains(name))
        .map(|(i, _)| i)
        .collect();

    let n_samples = rec.n_samples();
    let c_in = rec.n_channels();
    let mut samples = Vec::with_capacity(n_samples * keep.len());
    for s in 0..n_samples {
        for &c in &keep {
            samples.push(rec.samples[s * c_in + c]);
        }
    }

    Ok(Record {
        id: rec.id.clone(),
        sample_rate: rec.sample_rate,
        channel_names: keep.iter().map(|&c| rec.channel_names[c].clone()).collect(),
        samples,
        targets: rec.targets.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::record::default_channel_names;

    fn full_record() -> Record<f64> {
        let names = default_channel_names();
        let n_samples = 4;
        let c = names.len();
        Record {
            id: "r".into(),
            sample_rate: 200.0,
            channel_names: names,
            samples: (0..n_samples * c).map(|i| i as f64).collect(),
            targets: vec![1; n_samples],
        }
    }

    #[test]
    fn named_groups_have_expected_sizes() {
        let rec = full_record();
        let groups = ChannelGroups::default();
        assert_eq!(select_channels(&rec, "SaO2", &groups).unwrap().n_channels(), 1);
        assert_eq!(select_channels(&rec, "All", &groups).unwrap().n_channels(), 13);
        let eeg = select_channels(&rec, "All EEG", &groups).unwrap();
        assert_eq!(eeg.n_channels(), 6);
        assert_eq!(
            eeg.channel_names,
            vec!["F3-M2", "F4-M1", "C3-M2", "C4-M1", "O1-M2", "O2-M1"]
        );
        assert_eq!(
            select_channels(&rec, "All EMG", &groups).unwrap().channel_names,
            vec!["Chin1-Chin2"]
        );
    }

    #[test]
    fn selection_preserves_sample_values() {
        let rec = full_record();
        let groups = ChannelGroups::default();
        let ecg = select_channels(&rec, "ECG", &groups).unwrap();
        assert_eq!(ecg.channel(0), rec.channel(12));
    }

    #[test]
    fn plain_channel_name_falls_through() {
        let rec = full_record();
        let groups = ChannelGroups::default();
        let chest = select_channels(&rec, "CHEST", &groups).unwrap();
        assert_eq!(chest.channel_names, vec!["CHEST"]);
    }

    #[test]
    fn unknown_group_is_a_lookup_error() {
        let rec = full_record();
        let groups = ChannelGroups::default();
        assert!(matches!(
            select_channels(&rec, "nope", &groups),
            Err(Error::Lookup(_))
        ));
    }
}
