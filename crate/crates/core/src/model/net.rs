//! Full classifier stack: LSTM1 -> BN -> LSTM2 -> BN -> LSTM3 -> dense ->
//! softmax, with exact backpropagation through time.

use crate::error::{Error, Result};
use crate::model::loss::weighted_cross_entropy;
use crate::model::{BnCache, LstmCache, ModelGrads, ModelParams};
use crate::num::Scalar;

/// Whether batch normalization uses batch statistics (updating the running
/// ones) or the stored running statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Activations of one training forward pass.
#[derive(Debug)]
pub struct ForwardCache<T> {
    pub n_frames: usize,
    pub mask: Vec<bool>,
    pub lstm: Vec<LstmCache<T>>,
    pub bn: Vec<BnCache<T>>,
    /// `frames x 3` posteriors.
    pub probs: Vec<T>,
}

fn check_input<T: Scalar>(model: &ModelParams<T>, features: &[T]) -> Result<usize> {
    let d = model.config.input_dim;
    if features.len() % d != 0 {
        return Err(Error::Shape(format!(
            "feature buffer of {} values is not a multiple of input_dim {d}",
            features.len()
        )));
    }
    Ok(features.len() / d)
}

fn dense_softmax<T: Scalar>(model: &ModelParams<T>, hidden: &[T], n_frames: usize) -> Vec<T> {
    let h = model.config.hidden_units;
    let mut probs = vec![T::zero(); n_frames * 3];
    let mut logits = vec![T::zero(); 3];
    for t in 0..n_frames {
        model
            .dense
            .weights
            .matvec_into(&hidden[t * h..(t + 1) * h], &mut logits);
        for (slot, &b) in logits.iter_mut().zip(&model.dense.bias) {
            *slot += b;
        }
        let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for k in 0..3 {
            let e = (logits[k] - max).exp();
            probs[t * 3 + k] = e;
            sum += e;
        }
        for k in 0..3 {
            probs[t * 3 + k] /= sum;
        }
    }
    probs
}

/// Training-mode forward pass: BN uses batch statistics over `mask`ed frames
/// and updates the running ones. Returns posteriors and the cache for
/// [`backward`].
pub fn forward_train<T: Scalar>(
    model: &mut ModelParams<T>,
    features: &[T],
    mask: &[bool],
) -> Result<(Vec<T>, ForwardCache<T>)> {
    let n_frames = check_input(model, features)?;
    if mask.len() != n_frames {
        return Err(Error::Shape(format!(
            "mask of {} entries for {n_frames} frames",
            mask.len()
        )));
    }
    let eps = model.config.bn_eps;
    let momentum = model.config.bn_momentum;

    let (h1, c1) = model.lstm[0].forward(features, n_frames)?;
    let (b1, bn1) = model.batch_norm[0].forward_train(&h1, n_frames, mask, eps, momentum)?;
    let (h2, c2) = model.lstm[1].forward(&b1, n_frames)?;
    let (b2, bn2) = model.batch_norm[1].forward_train(&h2, n_frames, mask, eps, momentum)?;
    let (h3, c3) = model.lstm[2].forward(&b2, n_frames)?;
    let probs = dense_softmax(model, &h3, n_frames);

    Ok((
        probs.clone(),
        ForwardCache {
            n_frames,
            mask: mask.to_vec(),
            lstm: vec![c1, c2, c3],
            bn: vec![bn1, bn2],
            probs,
        },
    ))
}

/// Inference-mode forward pass using BN running statistics.
pub fn forward_infer<T: Scalar>(model: &ModelParams<T>, features: &[T]) -> Result<Vec<T>> {
    let n_frames = check_input(model, features)?;
    let eps = model.config.bn_eps;
    let (h1, _) = model.lstm[0].forward(features, n_frames)?;
    let b1 = model.batch_norm[0].forward_infer(&h1, n_frames, eps)?;
    let (h2, _) = model.lstm[1].forward(&b1, n_frames)?;
    let b2 = model.batch_norm[1].forward_infer(&h2, n_frames, eps)?;
    let (h3, _) = model.lstm[2].forward(&b2, n_frames)?;
    Ok(dense_softmax(model, &h3, n_frames))
}

/// Mode-dispatching forward. Train mode without target information treats
/// every frame as statistics-bearing.
pub fn forward<T: Scalar>(
    model: &mut ModelParams<T>,
    features: &[T],
    mode: Mode,
) -> Result<Vec<T>> {
    match mode {
        Mode::Infer => forward_infer(model, features),
        Mode::Train => {
            let n_frames = check_input(model, features)?;
            let mask = vec![true; n_frames];
            forward_train(model, features, &mask).map(|(probs, _)| probs)
        }
    }
}

/// Exact gradients of the weighted cross-entropy with respect to every
/// trainable parameter.
pub fn backward<T: Scalar>(
    model: &ModelParams<T>,
    cache: &ForwardCache<T>,
    targets: &[u8],
    class_weights: &[T; 3],
) -> Result<(T, ModelGrads<T>)> {
    let n = cache.n_frames;
    if targets.len() != n {
        return Err(Error::Shape(format!(
            "{} targets for {n} frames",
            targets.len()
        )));
    }
    let (loss, _) = weighted_cross_entropy(&cache.probs, targets, class_weights)?;
    let mut weight_sum = T::zero();
    for &y in targets {
        weight_sum += class_weights[y as usize];
    }

    let h = model.config.hidden_units;
    let mut grads = ModelGrads::zeros(&model.config);

    // Softmax + cross-entropy collapse to w * (p - onehot) / weight_sum.
    let hidden3 = &cache.lstm[2].hidden;
    let mut d_h3 = vec![T::zero(); n * h];
    let mut d_logits = vec![T::zero(); 3];
    for t in 0..n {
        let w = class_weights[targets[t] as usize];
        if w == T::zero() {
            continue;
        }
        for k in 0..3 {
            let indicator = if k == targets[t] as usize { T::one() } else { T::zero() };
            d_logits[k] = w * (cache.probs[t * 3 + k] - indicator) / weight_sum;
        }
        let h3_t = &hidden3[t * h..(t + 1) * h];
        grads.dense_weights.add_outer(&d_logits, h3_t);
        for (slot, &v) in grads.dense_bias.iter_mut().zip(&d_logits) {
            *slot += v;
        }
        model
            .dense
            .weights
            .matvec_t_add_into(&d_logits, &mut d_h3[t * h..(t + 1) * h]);
    }

    let (grad_lstm3, rest) = grads.lstm.split_last_mut().expect("three layers");
    let d_b2 = model.lstm[2].backward(&cache.lstm[2], &d_h3, grad_lstm3);
    let d_h2 = model.batch_norm[1].backward(&cache.bn[1], &d_b2, &cache.mask, &mut grads.batch_norm[1]);
    let d_b1 = model.lstm[1].backward(&cache.lstm[1], &d_h2, &mut rest[1]);
    let d_h1 = model.batch_norm[0].backward(&cache.bn[0], &d_b1, &cache.mask, &mut grads.batch_norm[0]);
    let _ = model.lstm[0].backward(&cache.lstm[0], &d_h1, &mut rest[0]);

    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::loss::cast_weights;
    use crate::model::{ModelConfig, N_CLASSES};
    use rand::Rng;

    fn tiny_config(seed: u64) -> ModelConfig {
        ModelConfig {
            input_dim: 2,
            hidden_units: 3,
            seed,
            ..ModelConfig::default()
        }
    }

    fn random_case(seed: u64, n: usize) -> (Vec<f64>, Vec<u8>) {
        let mut rng = crate::seed::rng(seed, "net-test");
        let features: Vec<f64> = (0..n * 2).map(|_| rng.random_range(-1.5..1.5)).collect();
        let targets: Vec<u8> = (0..n)
            .map(|t| if t + 1 == n { 0 } else { rng.random_range(1..3) as u8 })
            .collect();
        (features, targets)
    }

    #[test]
    fn rows_sum_to_one_and_are_positive() {
        let mut model = ModelParams::init(&tiny_config(3)).unwrap();
        let (features, targets) = random_case(10, 8);
        let mask: Vec<bool> = targets.iter().map(|&t| t != 0).collect();
        let (probs, _) = forward_train(&mut model, &features, &mask).unwrap();
        for t in 0..8 {
            let row = &probs[t * 3..(t + 1) * 3];
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
        }
        let infer = forward_infer(&model, &features).unwrap();
        for t in 0..8 {
            assert!((infer[t * 3..(t + 1) * 3].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_model_predicts_uniformly() {
        let mut model = ModelParams::init(&tiny_config(3)).unwrap();
        let flat = vec![0.0; model.trainable_to_flat().len()];
        model.trainable_from_flat(&flat).unwrap();
        let probs = forward_infer(&model, &[0.3, -0.7, 1.1, 0.2]).unwrap();
        for &p in &probs {
            assert!((p - 1.0 / N_CLASSES as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let (features, targets) = random_case(77, 6);
        let mask: Vec<bool> = targets.iter().map(|&t| t != 0).collect();
        let run = || {
            let mut model = ModelParams::init(&tiny_config(5)).unwrap();
            forward_train(&mut model, &features, &mask).unwrap().0
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn input_dim_mismatch_is_a_shape_error() {
        let model = ModelParams::init(&tiny_config(3)).unwrap();
        assert!(matches!(
            forward_infer(&model, &[0.0; 7]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn all_pad_targets_zero_every_gradient() {
        let mut model = ModelParams::init(&tiny_config(9)).unwrap();
        let (features, _) = random_case(1, 5);
        let mask = vec![true; 5];
        let (_, cache) = forward_train(&mut model, &features, &mask).unwrap();
        let err = backward(&model, &cache, &[0; 5], &cast_weights(&[0.0, 1.0, 14.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateBatch(_)));
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        let weights = cast_weights(&[0.0, 1.0, 14.0]);
        let mut worst = 0.0f64;
        for seed in 0..5 {
            let config = tiny_config(100 + seed);
            let (features, targets) = random_case(200 + seed, 5);
            let mask: Vec<bool> = targets.iter().map(|&t| t != 0).collect();

            let model = ModelParams::init(&config).unwrap();
            let (_, cache) = forward_train(&mut model.clone(), &features, &mask).unwrap();
            let (_, grads) = backward(&model, &cache, &targets, &weights).unwrap();
            let analytic = grads.to_flat();

            let base_flat = model.trainable_to_flat();
            let step = 1e-5;
            for (i, &a) in analytic.iter().enumerate() {
                let loss_at = |delta: f64| {
                    let mut perturbed = model.clone();
                    let mut flat = base_flat.clone();
                    flat[i] += delta;
                    perturbed.trainable_from_flat(&flat).unwrap();
                    let (probs, _) = forward_train(&mut perturbed, &features, &mask).unwrap();
                    weighted_cross_entropy(&probs, &targets, &weights).unwrap().0
                };
                let fd = (loss_at(step) - loss_at(-step)) / (2.0 * step);
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
                worst = worst.max(rel);
                assert!(
                    rel < 1e-4,
                    "seed {seed} param {i}: analytic {a} vs fd {fd} (rel {rel})"
                );
            }
        }
        // Keep some signal in the test log.
        println!("max relative gradient error: {worst:.3e}");
    }

    #[test]
    fn appended_pad_frames_change_nothing() {
        let weights = cast_weights(&[0.0, 1.0, 14.0]);
        let (features, targets) = random_case(33, 6);
        let mask: Vec<bool> = targets.iter().map(|&t| t != 0).collect();

        let mut model_a = ModelParams::init(&tiny_config(8)).unwrap();
        let (_, cache_a) = forward_train(&mut model_a, &features, &mask).unwrap();
        let model = ModelParams::init(&tiny_config(8)).unwrap();
        let (loss_a, grads_a) = backward(&model, &cache_a, &targets, &weights).unwrap();

        // Append three PAD frames with junk feature values.
        let mut features_b = features.clone();
        features_b.extend([13.0, -42.0, 1e6, -1e6, 0.5, 0.5]);
        let mut targets_b = targets.clone();
        targets_b.extend([0, 0, 0]);
        let mask_b: Vec<bool> = targets_b.iter().map(|&t| t != 0).collect();

        let mut model_b = ModelParams::init(&tiny_config(8)).unwrap();
        let (_, cache_b) = forward_train(&mut model_b, &features_b, &mask_b).unwrap();
        let (loss_b, grads_b) = backward(&model, &cache_b, &targets_b, &weights).unwrap();

        assert_eq!(loss_a, loss_b);
        assert_eq!(grads_a.to_flat(), grads_b.to_flat());
        // Running statistics are equally untouched by the padding.
        assert_eq!(
            model_a.batch_norm[0].running_mean,
            model_b.batch_norm[0].running_mean
        );
        assert_eq!(
            model_a.batch_norm[1].running_var,
            model_b.batch_norm[1].running_var
        );
    }
}
