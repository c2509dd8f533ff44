//! Temporary diagnostic: find where subnormal values accumulate during
//! training on the smoke features.

use polyscat::data::{pad_features, DatasetIndex};
use polyscat::model::{
    backward, forward_train, ModelConfig, ModelGrads, ModelParams, ParamLayout, RmsProp, Sequence,
};
use polyscat::scattering::ScatteringFeatures;

fn count_subnormal(values: &[f64]) -> usize {
    values
        .iter()
        .filter(|v| v.is_subnormal() || (**v != 0.0 && v.abs() < 1e-290))
        .count()
}

#[test]
#[ignore]
fn probe() {
    let index = DatasetIndex::load(std::path::Path::new("/tmp/smoke/ds/index.json")).unwrap();
    let roles = index.cv_roles(0).unwrap();
    let mut seqs = Vec::new();
    for id in &roles.train {
        let mut f =
            ScatteringFeatures::<f64>::load(&std::path::Path::new("/tmp/smoke/feat").join(id))
                .unwrap();
        pad_features(&mut f, 47).unwrap();
        seqs.push(Sequence {
            features: f.data,
            targets: f.frame_targets,
        });
    }
    let config = ModelConfig {
        input_dim: 468,
        hidden_units: 16,
        seed: polyscat::seed::derive(7, "model-init"),
        ..ModelConfig::default()
    };
    let mut model = ModelParams::<f64>::init(&config).unwrap();
    let layout = ParamLayout::trainable(&config);
    let mut opt = RmsProp::<f64>::new(0.05, 0.9, 1e-8);
    let weights = [0.0, 1.0, 13.0];

    for epoch in 0..6 {
        let start = std::time::Instant::now();
        for chunk in (0..seqs.len()).collect::<Vec<_>>().chunks(4) {
            let mut acc = ModelGrads::<f64>::zeros(&config);
            for &i in chunk {
                let mask: Vec<bool> = seqs[i].targets.iter().map(|&t| t != 0).collect();
                let (_, cache) = forward_train(&mut model, &seqs[i].features, &mask).unwrap();
                let (_, grads) = backward(&model, &cache, &seqs[i].targets, &weights).unwrap();
                acc.add_assign(&grads);
            }
            acc.scale(1.0 / 4.0);
            let mut flat = model.trainable_to_flat();
            opt.step(&mut flat, &acc.to_flat(), &layout).unwrap();
            model.trainable_from_flat(&flat).unwrap();
        }
        let flat = model.trainable_to_flat();
        let grads_sub = count_subnormal(&flat);
        let v_sub = count_subnormal(opt.state());
        let max_abs = flat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min_abs = flat
            .iter()
            .filter(|v| **v != 0.0)
            .fold(f64::INFINITY, |m, v| m.min(v.abs()));
        println!(
            "epoch {epoch}: {:?} params_sub={grads_sub} v_sub={v_sub} max={max_abs:.3e} min={min_abs:.3e}",
            start.elapsed()
        );
    }
}

#[test]
#[ignore]
fn probe_full_train() {
    let index = DatasetIndex::load(std::path::Path::new("/tmp/smoke/ds/index.json")).unwrap();
    let roles = index.cv_roles(0).unwrap();
    let load = |ids: &[String]| -> Vec<Sequence<f64>> {
        ids.iter()
            .map(|id| {
                let mut f = ScatteringFeatures::<f64>::load(
                    &std::path::Path::new("/tmp/smoke/feat").join(id),
                )
                .unwrap();
                pad_features(&mut f, 47).unwrap();
                Sequence {
                    features: f.data,
                    targets: f.frame_targets,
                }
            })
            .collect()
    };
    let train_seqs = load(&roles.train);
    let val_seqs = load(&roles.val);
    let config = ModelConfig {
        input_dim: 468,
        hidden_units: 16,
        seed: polyscat::seed::derive(7, "model-init"),
        ..ModelConfig::default()
    };
    let cfg = polyscat::model::TrainConfig {
        learning_rate: 0.05,
        max_epochs: 10,
        patience: 500,
        batch_size: 4,
        class_weights: [0.0, 1.0, 13.0],
        max_length: 47,
        seed: polyscat::seed::derive(7, "train"),
        ..polyscat::model::TrainConfig::default()
    };
    let start = std::time::Instant::now();
    let outcome = polyscat::model::train(&config, &train_seqs, &val_seqs, &cfg).unwrap();
    println!("10 epochs in {:?}; history: {:?}", start.elapsed(),
        outcome.history.iter().map(|e| (e.train_loss, e.val_loss)).collect::<Vec<_>>());
}
