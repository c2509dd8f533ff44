//! Stacked LSTM frame classifier: three LSTM layers with batch normalization
//! between them, a dense softmax head, weighted cross-entropy, exact BPTT
//! gradients, and an RMSprop training loop with early stopping.

mod batchnorm;
mod io;
mod loss;
mod lstm;
mod mat;
mod net;
mod rmsprop;
mod train;

pub use batchnorm::{BatchNormLayer, BnCache};
pub use io::{load_model, save_model, write_history_csv, ModelMeta};
pub use loss::{class_weight_from_prevalence, weighted_cross_entropy, PrevalenceWeights};
pub use lstm::{LstmCache, LstmLayer};
pub use mat::Mat;
pub use net::{backward, forward, forward_infer, forward_train, ForwardCache, Mode};
pub use rmsprop::RmsProp;
pub use train::{train, EpochStats, Sequence, TrainConfig, TrainOutcome};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{cast, Scalar};
use crate::seed;

/// Number of stacked LSTM layers (fixed by the architecture).
pub const N_LSTM_LAYERS: usize = 3;
/// Output classes: PAD = 0, non-arousal = 1, arousal = 2.
pub const N_CLASSES: usize = 3;

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Features per frame (`n_channels * n_paths` of the feature tensor).
    pub input_dim: usize,
    /// Hidden units per LSTM layer.
    pub hidden_units: usize,
    /// Fixed at 3.
    pub n_layers: usize,
    /// Fixed at 3.
    pub n_classes: usize,
    pub bn_eps: f64,
    /// Retention factor of the BN running statistics
    /// (`running = m * running + (1 - m) * batch`).
    pub bn_momentum: f64,
    /// Parameter initialization seed.
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_dim: 468, // 13 channels x 36 coefficients
            hidden_units: 100,
            n_layers: N_LSTM_LAYERS,
            n_classes: N_CLASSES,
            bn_eps: 1e-5,
            bn_momentum: 0.9,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.input_dim == 0 {
            return fail("input_dim must be >= 1".into());
        }
        if self.hidden_units == 0 {
            return fail("hidden_units must be >= 1".into());
        }
        if self.n_layers != N_LSTM_LAYERS {
            return fail(format!("n_layers is fixed at {N_LSTM_LAYERS}"));
        }
        if self.n_classes != N_CLASSES {
            return fail(format!("n_classes is fixed at {N_CLASSES}"));
        }
        if !(self.bn_eps > 0.0) {
            return fail("bn_eps must be positive".into());
        }
        if !(0.0..1.0).contains(&self.bn_momentum) {
            return fail("bn_momentum must lie in [0, 1)".into());
        }
        Ok(())
    }

    /// Input width of LSTM layer `l`.
    pub fn layer_input(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim
        } else {
            self.hidden_units
        }
    }
}

/// Dense softmax head.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    /// `n_classes x hidden`.
    pub weights: Mat<T>,
    pub bias: Vec<T>,
}

/// All learnable parameters plus BN running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub config: ModelConfig,
    pub lstm: Vec<LstmLayer<T>>,
    /// Two BN layers, between LSTM1/LSTM2 and LSTM2/LSTM3.
    pub batch_norm: Vec<BatchNormLayer<T>>,
    pub dense: DenseLayer<T>,
}

impl<T: Scalar> ModelParams<T> {
    /// Seeded initialization: weights uniform in `(-1/sqrt(fan_in),
    /// 1/sqrt(fan_in))`, biases zero except the forget gate at 1.0, BN at
    /// identity with unit running variance.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = seed::rng(config.seed, "model-init");
        let h = config.hidden_units;
        let mut uniform = |rows: usize, cols: usize, fan_in: usize| {
            let k = 1.0 / (fan_in as f64).sqrt();
            let mut m = Mat::zeros(rows, cols);
            for v in m.data.iter_mut() {
                *v = cast(rng.random_range(-k..k));
            }
            m
        };

        let lstm = (0..N_LSTM_LAYERS)
            .map(|l| {
                let input = config.layer_input(l);
                let mut layer = LstmLayer {
                    input_weights: uniform(4 * h, input, input),
                    recurrent_weights: uniform(4 * h, h, h),
                    bias: vec![T::zero(); 4 * h],
                };
                // Forget-gate bias starts open.
                layer.bias[h..2 * h].fill(T::one());
                layer
            })
            .collect();

        let batch_norm = (0..N_LSTM_LAYERS - 1)
            .map(|_| BatchNormLayer {
                gamma: vec![T::one(); h],
                beta: vec![T::zero(); h],
                running_mean: vec![T::zero(); h],
                running_var: vec![T::one(); h],
            })
            .collect();

        let dense = DenseLayer {
            weights: uniform(N_CLASSES, h, h),
            bias: vec![T::zero(); N_CLASSES],
        };

        Ok(ModelParams {
            config: config.clone(),
            lstm,
            batch_norm,
            dense,
        })
    }

    /// Trainable parameters in layout order (running stats excluded).
    pub fn trainable_to_flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for layer in &self.lstm {
            out.extend_from_slice(&layer.input_weights.data);
            out.extend_from_slice(&layer.recurrent_weights.data);
            out.extend_from_slice(&layer.bias);
        }
        for bn in &self.batch_norm {
            out.extend_from_slice(&bn.gamma);
            out.extend_from_slice(&bn.beta);
        }
        out.extend_from_slice(&self.dense.weights.data);
        out.extend_from_slice(&self.dense.bias);
        out
    }

    /// Writes a flat trainable vector back into the structured parameters.
    pub fn trainable_from_flat(&mut self, flat: &[T]) -> Result<()> {
        let mut offset = 0;
        let mut take = |len: usize| -> Result<std::ops::Range<usize>> {
            if offset + len > flat.len() {
                return Err(Error::Shape(format!(
                    "flat parameter vector too short: {} < {}",
                    flat.len(),
                    offset + len
                )));
            }
            let r = offset..offset + len;
            offset += len;
            Ok(r)
        };
        for layer in &mut self.lstm {
            let r = take(layer.input_weights.data.len())?;
            layer.input_weights.data.copy_from_slice(&flat[r]);
            let r = take(layer.recurrent_weights.data.len())?;
            layer.recurrent_weights.data.copy_from_slice(&flat[r]);
            let r = take(layer.bias.len())?;
            layer.bias.copy_from_slice(&flat[r]);
        }
        for bn in &mut self.batch_norm {
            let r = take(bn.gamma.len())?;
            bn.gamma.copy_from_slice(&flat[r]);
            let r = take(bn.beta.len())?;
            bn.beta.copy_from_slice(&flat[r]);
        }
        let r = take(self.dense.weights.data.len())?;
        self.dense.weights.data.copy_from_slice(&flat[r]);
        let r = take(self.dense.bias.len())?;
        self.dense.bias.copy_from_slice(&flat[r]);
        if offset != flat.len() {
            return Err(Error::Shape(format!(
                "flat parameter vector too long: {} > {offset}",
                flat.len()
            )));
        }
        Ok(())
    }

    /// Every parameter including BN running statistics, in the documented
    /// container order: per LSTM layer W, U, b; per BN layer gamma, beta,
    /// running mean, running variance; dense W, b.
    pub fn full_to_flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for layer in &self.lstm {
            out.extend_from_slice(&layer.input_weights.data);
            out.extend_from_slice(&layer.recurrent_weights.data);
            out.extend_from_slice(&layer.bias);
        }
        for bn in &self.batch_norm {
            out.extend_from_slice(&bn.gamma);
            out.extend_from_slice(&bn.beta);
            out.extend_from_slice(&bn.running_mean);
            out.extend_from_slice(&bn.running_var);
        }
        out.extend_from_slice(&self.dense.weights.data);
        out.extend_from_slice(&self.dense.bias);
        out
    }

    /// Inverse of [`ModelParams::full_to_flat`].
    pub fn full_from_flat(config: &ModelConfig, flat: &[T]) -> Result<Self> {
        let mut model = ModelParams::init(config)?;
        let mut offset = 0;
        let mut take = |len: usize| -> Result<std::ops::Range<usize>> {
            if offset + len > flat.len() {
                return Err(Error::Shape(format!(
                    "parameter file too short: {} < {}",
                    flat.len(),
                    offset + len
                )));
            }
            let r = offset..offset + len;
            offset += len;
            Ok(r)
        };
        for layer in &mut model.lstm {
            let r = take(layer.input_weights.data.len())?;
            layer.input_weights.data.copy_from_slice(&flat[r]);
            let r = take(layer.recurrent_weights.data.len())?;
            layer.recurrent_weights.data.copy_from_slice(&flat[r]);
            let r = take(layer.bias.len())?;
            layer.bias.copy_from_slice(&flat[r]);
        }
        for bn in &mut model.batch_norm {
            let r = take(bn.gamma.len())?;
            bn.gamma.copy_from_slice(&flat[r]);
            let r = take(bn.beta.len())?;
            bn.beta.copy_from_slice(&flat[r]);
            let r = take(bn.running_mean.len())?;
            bn.running_mean.copy_from_slice(&flat[r]);
            let r = take(bn.running_var.len())?;
            bn.running_var.copy_from_slice(&flat[r]);
        }
        let r = take(model.dense.weights.data.len())?;
        model.dense.weights.data.copy_from_slice(&flat[r]);
        let r = take(model.dense.bias.len())?;
        model.dense.bias.copy_from_slice(&flat[r]);
        if offset != flat.len() {
            return Err(Error::Shape(format!(
                "parameter file too long: {} > {offset}",
                flat.len()
            )));
        }
        Ok(model)
    }
}

/// Gradients of every trainable parameter, mirroring the flat layout.
#[derive(Debug, Clone)]
pub struct ModelGrads<T> {
    pub lstm: Vec<LstmGrad<T>>,
    pub batch_norm: Vec<BnGrad<T>>,
    pub dense_weights: Mat<T>,
    pub dense_bias: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct LstmGrad<T> {
    pub input_weights: Mat<T>,
    pub recurrent_weights: Mat<T>,
    pub bias: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct BnGrad<T> {
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
}

impl<T: Scalar> ModelGrads<T> {
    pub fn zeros(config: &ModelConfig) -> Self {
        let h = config.hidden_units;
        ModelGrads {
            lstm: (0..N_LSTM_LAYERS)
                .map(|l| LstmGrad {
                    input_weights: Mat::zeros(4 * h, config.layer_input(l)),
                    recurrent_weights: Mat::zeros(4 * h, h),
                    bias: vec![T::zero(); 4 * h],
                })
                .collect(),
            batch_norm: (0..N_LSTM_LAYERS - 1)
                .map(|_| BnGrad {
                    gamma: vec![T::zero(); h],
                    beta: vec![T::zero(); h],
                })
                .collect(),
            dense_weights: Mat::zeros(N_CLASSES, h),
            dense_bias: vec![T::zero(); N_CLASSES],
        }
    }

    /// Accumulates `other` into `self` (deterministic reduction order).
    pub fn add_assign(&mut self, other: &Self) {
        let add = |a: &mut [T], b: &[T]| {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += y;
            }
        };
        for (g, o) in self.lstm.iter_mut().zip(&other.lstm) {
            add(&mut g.input_weights.data, &o.input_weights.data);
            add(&mut g.recurrent_weights.data, &o.recurrent_weights.data);
            add(&mut g.bias, &o.bias);
        }
        for (g, o) in self.batch_norm.iter_mut().zip(&other.batch_norm) {
            add(&mut g.gamma, &o.gamma);
            add(&mut g.beta, &o.beta);
        }
        add(&mut self.dense_weights.data, &other.dense_weights.data);
        add(&mut self.dense_bias, &other.dense_bias);
    }

    pub fn scale(&mut self, factor: T) {
        let scale = |a: &mut [T]| {
            for x in a.iter_mut() {
                *x *= factor;
            }
        };
        for g in self.lstm.iter_mut() {
            scale(&mut g.input_weights.data);
            scale(&mut g.recurrent_weights.data);
            scale(&mut g.bias);
        }
        for g in self.batch_norm.iter_mut() {
            scale(&mut g.gamma);
            scale(&mut g.beta);
        }
        scale(&mut self.dense_weights.data);
        scale(&mut self.dense_bias);
    }

    /// Flattened in the same order as [`ModelParams::trainable_to_flat`].
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for g in &self.lstm {
            out.extend_from_slice(&g.input_weights.data);
            out.extend_from_slice(&g.recurrent_weights.data);
            out.extend_from_slice(&g.bias);
        }
        for g in &self.batch_norm {
            out.extend_from_slice(&g.gamma);
            out.extend_from_slice(&g.beta);
        }
        out.extend_from_slice(&self.dense_weights.data);
        out.extend_from_slice(&self.dense_bias);
        out
    }
}

/// Names of the flat trainable-parameter segments, for optimizer diagnostics
/// and gradient checking.
#[derive(Debug, Clone)]
pub struct ParamLayout {
    segments: Vec<(String, usize)>,
    total: usize,
}

impl ParamLayout {
    pub fn trainable(config: &ModelConfig) -> Self {
        let h = config.hidden_units;
        let mut segments = Vec::new();
        for l in 0..N_LSTM_LAYERS {
            let input = config.layer_input(l);
            segments.push((format!("lstm{}.input_weights", l + 1), 4 * h * input));
            segments.push((format!("lstm{}.recurrent_weights", l + 1), 4 * h * h));
            segments.push((format!("lstm{}.bias", l + 1), 4 * h));
        }
        for k in 0..N_LSTM_LAYERS - 1 {
            segments.push((format!("bn{}.gamma", k + 1), h));
            segments.push((format!("bn{}.beta", k + 1), h));
        }
        segments.push(("dense.weights".into(), N_CLASSES * h));
        segments.push(("dense.bias".into(), N_CLASSES));
        let total = segments.iter().map(|(_, len)| len).sum();
        ParamLayout { segments, total }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Segment name owning flat index `index`.
    pub fn name_of(&self, index: usize) -> &str {
        let mut offset = 0;
        for (name, len) in &self.segments {
            offset += len;
            if index < offset {
                return name;
            }
        }
        "out-of-range"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ModelConfig {
        ModelConfig {
            input_dim: 2,
            hidden_units: 3,
            seed: 41,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn init_is_seeded_and_deterministic() {
        let a = ModelParams::<f64>::init(&tiny_config()).unwrap();
        let b = ModelParams::<f64>::init(&tiny_config()).unwrap();
        assert_eq!(a, b);
        let c = ModelParams::<f64>::init(&ModelConfig {
            seed: 42,
            ..tiny_config()
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forget_gate_bias_starts_at_one() {
        let model = ModelParams::<f64>::init(&tiny_config()).unwrap();
        let h = 3;
        for layer in &model.lstm {
            assert!(layer.bias[..h].iter().all(|&b| b == 0.0));
            assert!(layer.bias[h..2 * h].iter().all(|&b| b == 1.0));
            assert!(layer.bias[2 * h..].iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn flat_round_trips_match_layout() {
        let config = tiny_config();
        let model = ModelParams::<f64>::init(&config).unwrap();
        let flat = model.trainable_to_flat();
        assert_eq!(flat.len(), ParamLayout::trainable(&config).total());

        let mut other = ModelParams::<f64>::init(&ModelConfig {
            seed: 99,
            ..config.clone()
        })
        .unwrap();
        other.trainable_from_flat(&flat).unwrap();
        assert_eq!(other.trainable_to_flat(), flat);

        let full = model.full_to_flat();
        let restored = ModelParams::<f64>::full_from_flat(&config, &full).unwrap();
        assert_eq!(restored, model);
    }

    #[test]
    fn layout_names_resolve() {
        let layout = ParamLayout::trainable(&tiny_config());
        assert_eq!(layout.name_of(0), "lstm1.input_weights");
        assert_eq!(layout.name_of(layout.total() - 1), "dense.bias");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for config in [
            ModelConfig {
                input_dim: 0,
                ..tiny_config()
            },
            ModelConfig {
                n_layers: 2,
                ..tiny_config()
            },
            ModelConfig {
                bn_momentum: 1.0,
                ..tiny_config()
            },
        ] {
            assert!(matches!(config.validate(), Err(Error::Config(_))));
        }
    }
}
