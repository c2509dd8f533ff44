//! `scatter`: compute scattering features for every record, optionally
//! fitting or applying log-median normalization.

use std::path::PathBuf;

use serde::Serialize;

use polyscat::data::{load_record, select_channels, DatasetIndex, Record};
use polyscat::filterbank::FilterBank;
use polyscat::scattering::{fit_normalizer, scatter_record, NormalizerParams, ScatteringFeatures};
use polyscat::{Error, Result};

use crate::config::PipelineConfig;
use crate::util::{container_dirs, load_all_features, load_features_by_id, print_summary};

pub struct ScatterArgs {
    pub records: PathBuf,
    pub out: PathBuf,
    pub channels: Option<String>,
    pub normalize: bool,
    pub index: Option<PathBuf>,
    pub fold: Option<usize>,
    pub normalizer: Option<PathBuf>,
}

#[derive(Serialize)]
struct Summary {
    records: usize,
    channels: usize,
    paths_per_channel: usize,
    frame_rate: f64,
    normalized: bool,
    normalizer_file: Option<String>,
}

pub fn run(config: &PipelineConfig, args: &ScatterArgs) -> Result<()> {
    if args.normalize && args.normalizer.is_some() {
        return Err(Error::Config(
            "--normalize fits a new normalizer; it cannot be combined with --normalizer".into(),
        ));
    }
    let bank = FilterBank::<f64>::build(config.filterbank.clone())?;
    let existing = args
        .normalizer
        .as_deref()
        .map(NormalizerParams::<f64>::load)
        .transpose()?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;

    let mut ids = Vec::new();
    let mut n_channels = 0;
    let mut n_paths = 0;
    for dir in container_dirs(&args.records, "header.json")? {
        let mut rec: Record<f64> = load_record(&dir)?;
        if let Some(group) = &args.channels {
            rec = select_channels(&rec, group, &config.groups)?;
        }
        let features = scatter_record(&rec, &bank)?;
        let features = match &existing {
            Some(norm) => norm.apply(features)?,
            None => features,
        };
        n_channels = features.n_channels();
        n_paths = features.n_paths();
        features.save(&args.out.join(&rec.id))?;
        ids.push(rec.id);
    }

    let mut normalizer_file = None;
    if args.normalize {
        let fit_ids = fit_subset(args, &ids)?;
        let train_sets = load_features_by_id(&args.out, &fit_ids)?;
        let refs: Vec<&ScatteringFeatures<f64>> = train_sets.iter().collect();
        let mu: Option<Vec<f64>> = if config.normalizer_mu.is_empty() {
            None
        } else {
            Some(config.normalizer_mu.clone())
        };
        let norm = fit_normalizer(&refs, mu.as_deref(), config.normalizer_eps)?;
        drop(train_sets);

        let norm_path = args.out.join("normalizer.json");
        norm.save(&norm_path)?;
        normalizer_file = Some(norm_path.display().to_string());
        for features in load_all_features(&args.out)? {
            let id = features.record_id.clone();
            let normalized = norm.apply(features)?;
            normalized.save(&args.out.join(&id))?;
        }
    }

    print_summary(&Summary {
        records: ids.len(),
        channels: n_channels,
        paths_per_channel: n_paths,
        frame_rate: bank.config.frame_rate(),
        normalized: args.normalize || existing.is_some(),
        normalizer_file,
    });
    Ok(())
}

/// Records the normalizer statistics come from: the fold's train role when
/// `--index`/`--fold` are given, the whole cross-validation pool with only
/// `--index`, and every record otherwise.
fn fit_subset(args: &ScatterArgs, all_ids: &[String]) -> Result<Vec<String>> {
    match (&args.index, args.fold) {
        (Some(index_path), Some(fold)) => {
            let index = DatasetIndex::load(index_path)?;
            Ok(index.cv_roles(fold)?.train)
        }
        (Some(index_path), None) => {
            let index = DatasetIndex::load(index_path)?;
            Ok(index.cv_pool())
        }
        (None, Some(_)) => Err(Error::Config("--fold requires --index".into())),
        (None, None) => Ok(all_ids.to_vec()),
    }
}
