//! RMSprop parameter updates over the flat trainable vector.

use crate::error::{Error, Result};
use crate::model::ParamLayout;
use crate::num::Scalar;

/// `v <- decay * v + (1 - decay) * g^2`,
/// `theta <- theta - lr * g / sqrt(v + eps)`.
#[derive(Debug, Clone)]
pub struct RmsProp<T> {
    pub learning_rate: T,
    pub decay: T,
    pub eps: T,
    /// Moving average of squared gradients; zeros on the first step.
    v: Vec<T>,
}

impl<T: Scalar> RmsProp<T> {
    pub fn new(learning_rate: T, decay: T, eps: T) -> Self {
        RmsProp {
            learning_rate,
            decay,
            eps,
            v: Vec::new(),
        }
    }

    /// Current second-moment state (empty before the first step).
    pub fn state(&self) -> &[T] {
        &self.v
    }

    /// One elementwise update. A non-finite gradient aborts with the name of
    /// the offending parameter segment.
    pub fn step(&mut self, params: &mut [T], grads: &[T], layout: &ParamLayout) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::Shape(format!(
                "{} parameters vs {} gradients",
                params.len(),
                grads.len()
            )));
        }
        if self.v.is_empty() {
            self.v = vec![T::zero(); params.len()];
        } else if self.v.len() != params.len() {
            return Err(Error::Shape(format!(
                "optimizer state of {} entries for {} parameters",
                self.v.len(),
                params.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::Divergence {
                param: layout.name_of(i).to_string(),
            });
        }
        let one_minus = T::one() - self.decay;
        for ((p, &g), v) in params.iter_mut().zip(grads).zip(self.v.iter_mut()) {
            *v = self.decay * *v + one_minus * g * g;
            *p = *p - self.learning_rate * g / (*v + self.eps).sqrt();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    fn layout() -> ParamLayout {
        ParamLayout::trainable(&ModelConfig {
            input_dim: 1,
            hidden_units: 1,
            ..ModelConfig::default()
        })
    }

    #[test]
    fn zero_gradient_leaves_parameters_and_decays_state() {
        let mut opt = RmsProp::<f64>::new(0.1, 0.9, 1e-8);
        let layout = layout();
        let n = layout.total();
        let mut params = vec![1.5; n];
        opt.step(&mut params, &vec![1.0; n], &layout).unwrap();
        let v_after_first = opt.state()[0];
        let params_snapshot = params.clone();
        opt.step(&mut params, &vec![0.0; n], &layout).unwrap();
        assert_eq!(params, params_snapshot);
        assert!((opt.state()[0] - 0.9 * v_after_first).abs() < 1e-15);
    }

    #[test]
    fn scalar_updates_match_hand_evaluation() {
        let mut opt = RmsProp::<f64>::new(0.1, 0.9, 1e-8);
        let layout = layout();
        let n = layout.total();
        let mut params = vec![0.0; n];
        opt.step(&mut params, &vec![1.0; n], &layout).unwrap();
        assert!((opt.state()[0] - 0.1).abs() < 1e-15);
        let expected1 = -0.1 / (0.1f64 + 1e-8).sqrt();
        assert!((params[0] - expected1).abs() < 1e-12);
        assert!((params[0] - -0.31623).abs() < 1e-5);

        opt.step(&mut params, &vec![1.0; n], &layout).unwrap();
        assert!((opt.state()[0] - 0.19).abs() < 1e-15);
        let expected2 = expected1 - 0.1 / (0.19f64 + 1e-8).sqrt();
        assert!((params[0] - expected2).abs() < 1e-12);
        assert!((params[0] - expected1 - -0.22942).abs() < 1e-5);
    }

    #[test]
    fn non_finite_gradient_names_the_parameter() {
        let mut opt = RmsProp::<f64>::new(0.1, 0.9, 1e-8);
        let layout = layout();
        let n = layout.total();
        let mut params = vec![0.0; n];
        let mut grads = vec![0.0; n];
        *grads.last_mut().unwrap() = f64::NAN;
        match opt.step(&mut params, &grads, &layout).unwrap_err() {
            Error::Divergence { param } => assert_eq!(param, "dense.bias"),
            other => panic!("expected divergence, got {other}"),
        }
    }
}
