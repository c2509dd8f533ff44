//! Batch normalization over the frame axis of one sequence.
//!
//! Training statistics are computed over non-PAD frames only, so appended
//! padding can never shift the normalization; every frame (padded or not) is
//! still normalized and passed on. Inference uses the running statistics.

use crate::error::{Error, Result};
use crate::model::BnGrad;
use crate::num::{cast, cast_usize, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormLayer<T> {
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
}

/// Forward-pass byproducts needed for the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache<T> {
    /// Normalized activations before scale/shift, `frames x F`.
    pub normalized: Vec<T>,
    /// `1 / sqrt(var + eps)` per feature.
    pub inv_std: Vec<T>,
    /// Frames that contributed to the statistics.
    pub n_stats: usize,
}

impl<T: Scalar> BatchNormLayer<T> {
    pub fn features(&self) -> usize {
        self.gamma.len()
    }

    /// Train-mode forward: batch statistics over `mask`ed frames (biased
    /// variance), running statistics updated with the retention `momentum`.
    pub fn forward_train(
        &mut self,
        x: &[T],
        n_frames: usize,
        mask: &[bool],
        eps: f64,
        momentum: f64,
    ) -> Result<(Vec<T>, BnCache<T>)> {
        let f_dim = self.features();
        debug_assert_eq!(x.len(), n_frames * f_dim);
        debug_assert_eq!(mask.len(), n_frames);
        let n_stats = mask.iter().filter(|&&m| m).count();
        if n_stats < 2 {
            return Err(Error::Training(format!(
                "batch normalization statistics need at least 2 frames, got {n_stats}"
            )));
        }
        let inv_n = T::one() / cast_usize(n_stats);
        let eps_t: T = cast(eps);
        let momentum_t: T = cast(momentum);

        let mut mean = vec![T::zero(); f_dim];
        for (t, &m) in mask.iter().enumerate() {
            if m {
                for (slot, &v) in mean.iter_mut().zip(&x[t * f_dim..(t + 1) * f_dim]) {
                    *slot += v;
                }
            }
        }
        for slot in mean.iter_mut() {
            *slot *= inv_n;
        }

        let mut var = vec![T::zero(); f_dim];
        for (t, &m) in mask.iter().enumerate() {
            if m {
                let row = &x[t * f_dim..(t + 1) * f_dim];
                for (d, slot) in var.iter_mut().enumerate() {
                    let delta = row[d] - mean[d];
                    *slot += delta * delta;
                }
            }
        }
        for slot in var.iter_mut() {
            *slot *= inv_n;
        }

        let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + eps_t).sqrt()).collect();

        let mut normalized = vec![T::zero(); x.len()];
        let mut out = vec![T::zero(); x.len()];
        for t in 0..n_frames {
            let row = t * f_dim;
            for d in 0..f_dim {
                let xhat = (x[row + d] - mean[d]) * inv_std[d];
                normalized[row + d] = xhat;
                out[row + d] = self.gamma[d] * xhat + self.beta[d];
            }
        }

        let one_minus = T::one() - momentum_t;
        for d in 0..f_dim {
            self.running_mean[d] = momentum_t * self.running_mean[d] + one_minus * mean[d];
            self.running_var[d] = momentum_t * self.running_var[d] + one_minus * var[d];
        }

        Ok((
            out,
            BnCache {
                normalized,
                inv_std,
                n_stats,
            },
        ))
    }

    /// Inference-mode forward using the running statistics.
    pub fn forward_infer(&self, x: &[T], n_frames: usize, eps: f64) -> Result<Vec<T>> {
        let f_dim = self.features();
        if x.len() != n_frames * f_dim {
            return Err(Error::Shape(format!(
                "batch-norm input holds {} values, expected {n_frames} x {f_dim}",
                x.len()
            )));
        }
        let eps_t: T = cast(eps);
        let inv_std: Vec<T> = self
            .running_var
            .iter()
            .map(|&v| T::one() / (v + eps_t).sqrt())
            .collect();
        let mut out = vec![T::zero(); x.len()];
        for t in 0..n_frames {
            let row = t * f_dim;
            for d in 0..f_dim {
                let xhat = (x[row + d] - self.running_mean[d]) * inv_std[d];
                out[row + d] = self.gamma[d] * xhat + self.beta[d];
            }
        }
        Ok(out)
    }

    /// Backward pass through the train-mode normalization. `d_out` covers all
    /// frames; statistics gradients are distributed to masked frames only.
    pub fn backward(
        &self,
        cache: &BnCache<T>,
        d_out: &[T],
        mask: &[bool],
        grad: &mut BnGrad<T>,
    ) -> Vec<T> {
        let f_dim = self.features();
        let n_frames = mask.len();
        let inv_n = T::one() / cast_usize(cache.n_stats);

        let mut d_x = vec![T::zero(); d_out.len()];
        let mut sum_dxhat = vec![T::zero(); f_dim];
        let mut sum_dxhat_xhat = vec![T::zero(); f_dim];
        for t in 0..n_frames {
            let row = t * f_dim;
            for d in 0..f_dim {
                let go = d_out[row + d];
                let xhat = cache.normalized[row + d];
                grad.gamma[d] += go * xhat;
                grad.beta[d] += go;
                let dxhat = go * self.gamma[d];
                sum_dxhat[d] += dxhat;
                sum_dxhat_xhat[d] += dxhat * xhat;
                d_x[row + d] = dxhat * cache.inv_std[d];
            }
        }
        // d_mean and d_var land only on the frames that defined the statistics.
        for (t, &m) in mask.iter().enumerate() {
            if !m {
                continue;
            }
            let row = t * f_dim;
            for d in 0..f_dim {
                let xhat = cache.normalized[row + d];
                let correction =
                    (sum_dxhat[d] + xhat * sum_dxhat_xhat[d]) * cache.inv_std[d] * inv_n;
                d_x[row + d] -= correction;
            }
        }
        d_x
    }
}
