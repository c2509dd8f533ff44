//! RMSprop training loop with validation-based early stopping.
//!
//! One batch is `batch_size` full sequences; each sequence runs full-length
//! BPTT (no truncation) and the per-sequence gradients are averaged before
//! the optimizer step. Sequence order is reshuffled every epoch from the
//! seeded stream, so identical seeds and data reproduce identical parameters
//! bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::loss::{cast_weights, weighted_cross_entropy};
use crate::model::net::{backward, forward_infer, forward_train};
use crate::model::rmsprop::RmsProp;
use crate::model::{ModelConfig, ModelGrads, ModelParams, ParamLayout};
use crate::num::{cast, cast_usize, Scalar};
use crate::seed;
use rand::seq::SliceRandom;

/// Optimization hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub rmsprop_decay: f64,
    pub rmsprop_eps: f64,
    /// `[w_pad, w_non_arousal, w_arousal]`.
    pub class_weights: [f64; 3],
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub max_epochs: usize,
    /// Sequences per optimizer step (gradients averaged).
    pub batch_size: usize,
    /// Fixed frame count every sequence is padded to.
    pub max_length: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            rmsprop_decay: 0.9,
            rmsprop_eps: 1e-8,
            class_weights: [0.0, 1.0, 14.0],
            patience: 50,
            max_epochs: 500,
            batch_size: 1,
            max_length: 13371,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.into()));
        if !(self.learning_rate > 0.0) {
            return fail("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.rmsprop_decay) {
            return fail("rmsprop_decay must lie in [0, 1)");
        }
        if !(self.rmsprop_eps > 0.0) {
            return fail("rmsprop_eps must be positive");
        }
        if self.class_weights.iter().any(|&w| w < 0.0) {
            return fail("class weights must be non-negative");
        }
        if self.patience == 0 {
            return fail("patience must be >= 1");
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be >= 1");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1");
        }
        if self.max_length == 0 {
            return fail("max_length must be >= 1");
        }
        Ok(())
    }
}

/// One padded training sequence: `max_length x input_dim` features plus
/// per-frame targets.
#[derive(Debug, Clone)]
pub struct Sequence<T> {
    pub features: Vec<T>,
    pub targets: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Best parameters and the full loss history of one training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub params: ModelParams<T>,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

struct EarlyStopper {
    patience: usize,
    best: f64,
    best_epoch: usize,
    since_best: usize,
}

impl EarlyStopper {
    fn new(patience: usize) -> Self {
        EarlyStopper {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            since_best: 0,
        }
    }

    /// Records one epoch; returns `(improved, stop)`.
    fn observe(&mut self, epoch: usize, val_loss: f64) -> (bool, bool) {
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.since_best = 0;
            (true, false)
        } else {
            self.since_best += 1;
            (false, self.since_best >= self.patience)
        }
    }
}

fn check_sequences<T: Scalar>(
    label: &str,
    set: &[Sequence<T>],
    model_config: &ModelConfig,
    max_length: usize,
) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Training(format!("{label} set is empty")));
    }
    for (i, seq) in set.iter().enumerate() {
        if seq.targets.len() != max_length {
            return Err(Error::Training(format!(
                "{label} sequence {i} has {} frames, expected max_length {max_length} \
                 (pad features first)",
                seq.targets.len()
            )));
        }
        if seq.features.len() != max_length * model_config.input_dim {
            return Err(Error::Shape(format!(
                "{label} sequence {i}: {} feature values for {max_length} frames x {}",
                seq.features.len(),
                model_config.input_dim
            )));
        }
        if seq.targets.iter().all(|&t| t == 0) {
            return Err(Error::Training(format!(
                "{label} sequence {i} has no non-PAD frames"
            )));
        }
    }
    Ok(())
}

/// Mean validation loss under the running-statistics (inference) forward.
fn validation_loss<T: Scalar>(
    model: &ModelParams<T>,
    val: &[Sequence<T>],
    weights: &[T; 3],
) -> Result<f64> {
    let mut total = 0.0;
    for seq in val {
        let probs = forward_infer(model, &seq.features)?;
        let (loss, _) = weighted_cross_entropy(&probs, &seq.targets, weights)?;
        total += loss.to_f64().unwrap();
    }
    Ok(total / val.len() as f64)
}

/// Trains one classifier, returning the parameters of the best validation
/// epoch and the per-epoch loss history.
pub fn train<T: Scalar>(
    model_config: &ModelConfig,
    train_set: &[Sequence<T>],
    val_set: &[Sequence<T>],
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    model_config.validate()?;
    cfg.validate()?;
    check_sequences("train", train_set, model_config, cfg.max_length)?;
    check_sequences("validation", val_set, model_config, cfg.max_length)?;

    let weights = cast_weights::<T>(&cfg.class_weights);
    let mut model = ModelParams::init(model_config)?;
    let layout = ParamLayout::trainable(model_config);
    let mut optimizer = RmsProp::new(
        cast::<T>(cfg.learning_rate),
        cast::<T>(cfg.rmsprop_decay),
        cast::<T>(cfg.rmsprop_eps),
    );

    let mut history = Vec::new();
    let mut stopper = EarlyStopper::new(cfg.patience);
    let mut best_params = model.clone();

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        let mut rng = seed::rng_indexed(cfg.seed, "epoch-shuffle", epoch as u64);
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let mut accumulated = ModelGrads::<T>::zeros(model_config);
            for &idx in chunk {
                let seq = &train_set[idx];
                let mask: Vec<bool> = seq.targets.iter().map(|&t| t != 0).collect();
                let (_, cache) = forward_train(&mut model, &seq.features, &mask)?;
                let (loss, grads) = backward(&model, &cache, &seq.targets, &weights)?;
                accumulated.add_assign(&grads);
                epoch_loss += loss.to_f64().unwrap();
            }
            accumulated.scale(T::one() / cast_usize(chunk.len()));
            let mut flat_params = model.trainable_to_flat();
            optimizer.step(&mut flat_params, &accumulated.to_flat(), &layout)?;
            model.trainable_from_flat(&flat_params)?;
        }
        let train_loss = epoch_loss / train_set.len() as f64;
        let val_loss = validation_loss(&model, val_set, &weights)?;
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });

        let (improved, stop) = stopper.observe(epoch, val_loss);
        if improved {
            best_params = model.clone();
        }
        if stop {
            break;
        }
    }

    Ok(TrainOutcome {
        params: best_params,
        history,
        best_epoch: stopper.best_epoch,
        best_val_loss: stopper.best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn stopper_returns_first_epoch_under_increasing_loss() {
        let mut stopper = EarlyStopper::new(1);
        assert_eq!(stopper.observe(1, 1.0), (true, false));
        assert_eq!(stopper.observe(2, 1.5), (false, true));
        assert_eq!(stopper.best_epoch, 1);
        assert_eq!(stopper.best, 1.0);
    }

    #[test]
    fn stopper_waits_out_the_patience_window() {
        let mut stopper = EarlyStopper::new(3);
        stopper.observe(1, 1.0);
        assert_eq!(stopper.observe(2, 1.1), (false, false));
        assert_eq!(stopper.observe(3, 0.9), (true, false));
        assert_eq!(stopper.observe(4, 0.95), (false, false));
        assert_eq!(stopper.observe(5, 0.92), (false, false));
        assert_eq!(stopper.observe(6, 0.91), (false, true));
        assert_eq!(stopper.best_epoch, 3);
    }

    fn toy_config() -> ModelConfig {
        ModelConfig {
            input_dim: 2,
            hidden_units: 8,
            seed: 17,
            ..ModelConfig::default()
        }
    }

    /// Two-class frames separated by a 3-sigma mean shift.
    fn toy_sequences(seed: u64, count: usize, frames: usize) -> Vec<Sequence<f64>> {
        let mut rng = crate::seed::rng(seed, "toy-task");
        (0..count)
            .map(|_| {
                let targets: Vec<u8> = (0..frames)
                    .map(|_| if rng.random_range(0.0..1.0) < 0.3 { 2 } else { 1 })
                    .collect();
                let features: Vec<f64> = targets
                    .iter()
                    .flat_map(|&t| {
                        let shift = if t == 2 { 3.0 } else { 0.0 };
                        let a: f64 = rng.sample(StandardNormal);
                        let b: f64 = rng.sample(StandardNormal);
                        [a + shift, b + shift]
                    })
                    .collect();
                Sequence { features, targets }
            })
            .collect()
    }

    fn toy_train_config() -> TrainConfig {
        TrainConfig {
            max_length: 16,
            max_epochs: 200,
            patience: 50,
            batch_size: 4,
            class_weights: [0.0, 1.0, 2.0],
            ..TrainConfig::default()
        }
    }

    #[test]
    fn separable_toy_task_reaches_a_tenth_of_initial_loss() {
        let train_set = toy_sequences(1, 12, 16);
        let val_set = toy_sequences(2, 4, 16);
        let outcome = train(&toy_config(), &train_set, &val_set, &toy_train_config()).unwrap();
        let initial = outcome.history[0].val_loss;
        assert!(
            outcome.best_val_loss < 0.1 * initial,
            "initial {initial}, best {} at epoch {} of {}",
            outcome.best_val_loss,
            outcome.best_epoch,
            outcome.history.len()
        );
    }

    #[test]
    fn identical_seeds_reproduce_history_and_parameters() {
        let train_set = toy_sequences(3, 6, 16);
        let val_set = toy_sequences(4, 2, 16);
        let cfg = TrainConfig {
            max_epochs: 12,
            ..toy_train_config()
        };
        let a = train(&toy_config(), &train_set, &val_set, &cfg).unwrap();
        let b = train(&toy_config(), &train_set, &val_set, &cfg).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.params.full_to_flat(), b.params.full_to_flat());
    }

    #[test]
    fn best_epoch_is_the_validation_minimum() {
        let train_set = toy_sequences(5, 6, 16);
        let val_set = toy_sequences(6, 2, 16);
        let cfg = TrainConfig {
            max_epochs: 30,
            patience: 5,
            ..toy_train_config()
        };
        let outcome = train(&toy_config(), &train_set, &val_set, &cfg).unwrap();
        let min = outcome
            .history
            .iter()
            .map(|e| e.val_loss)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(outcome.best_val_loss, min);
        let recorded = outcome
            .history
            .iter()
            .find(|e| e.epoch == outcome.best_epoch)
            .unwrap();
        assert_eq!(recorded.val_loss, min);
    }

    #[test]
    fn duplicated_batch_matches_single_copy_gradient() {
        let config = toy_config();
        let seqs = toy_sequences(7, 1, 16);
        let seq = &seqs[0];
        let mask: Vec<bool> = seq.targets.iter().map(|&t| t != 0).collect();
        let weights = cast_weights(&[0.0, 1.0, 2.0]);

        let single = {
            let mut model = ModelParams::<f64>::init(&config).unwrap();
            let (_, cache) = forward_train(&mut model, &seq.features, &mask).unwrap();
            let model = ModelParams::<f64>::init(&config).unwrap();
            let (_, grads) = backward(&model, &cache, &seq.targets, &weights).unwrap();
            grads.to_flat()
        };

        let doubled = {
            let mut model = ModelParams::<f64>::init(&config).unwrap();
            let mut acc = ModelGrads::<f64>::zeros(&config);
            for _ in 0..2 {
                let (_, cache) = forward_train(&mut model, &seq.features, &mask).unwrap();
                let frozen = ModelParams::<f64>::init(&config).unwrap();
                let (_, grads) = backward(&frozen, &cache, &seq.targets, &weights).unwrap();
                acc.add_assign(&grads);
            }
            acc.scale(0.5);
            acc.to_flat()
        };

        for (a, b) in single.iter().zip(&doubled) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_data_is_rejected() {
        let cfg = toy_train_config();
        let config = toy_config();
        let mut seqs = toy_sequences(8, 2, 16);
        assert!(matches!(
            train::<f64>(&config, &[], &seqs, &cfg),
            Err(Error::Training(_))
        ));
        seqs[1].targets = vec![0; 16];
        let val = toy_sequences(9, 1, 16);
        assert!(matches!(
            train(&config, &seqs, &val, &cfg),
            Err(Error::Training(_))
        ));
    }
}
