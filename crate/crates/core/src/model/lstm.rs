//! Single LSTM layer: forward recurrence and exact backward-through-time.

use crate::error::{Error, Result};
use crate::model::mat::Mat;
use crate::model::LstmGrad;
use crate::num::Scalar;

/// Gate block order inside the stacked `4H` dimension: input, forget, cell,
/// output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer<T> {
    /// `4H x input`.
    pub input_weights: Mat<T>,
    /// `4H x H`.
    pub recurrent_weights: Mat<T>,
    /// `4H`.
    pub bias: Vec<T>,
}

/// Activations recorded during the forward pass, consumed by
/// [`LstmLayer::backward`].
#[derive(Debug, Clone)]
pub struct LstmCache<T> {
    pub n_frames: usize,
    /// Copy of the layer input, `frames x input`.
    pub inputs: Vec<T>,
    /// Post-activation gates, `frames x H` each.
    pub gate_i: Vec<T>,
    pub gate_f: Vec<T>,
    pub gate_g: Vec<T>,
    pub gate_o: Vec<T>,
    /// Cell states `c_t`, `frames x H`.
    pub cells: Vec<T>,
    /// `tanh(c_t)`, `frames x H`.
    pub tanh_cells: Vec<T>,
    /// Hidden states `h_t`, `frames x H`.
    pub hidden: Vec<T>,
}

#[inline]
fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

impl<T: Scalar> LstmLayer<T> {
    pub fn hidden_units(&self) -> usize {
        self.recurrent_weights.cols
    }

    pub fn input_units(&self) -> usize {
        self.input_weights.cols
    }

    /// Runs the recurrence from zero initial state over `seq`
    /// (`n_frames x input`, row-major) and returns the hidden states with the
    /// cache needed for the backward pass.
    ///
    /// Per frame: `i,f,o = sigmoid(.)`, `g = tanh(.)`,
    /// `c_t = f (.) c_(t-1) + i (.) g`, `h_t = o (.) tanh(c_t)`.
    pub fn forward(&self, seq: &[T], n_frames: usize) -> Result<(Vec<T>, LstmCache<T>)> {
        let input = self.input_units();
        let h = self.hidden_units();
        if seq.len() != n_frames * input {
            return Err(Error::Shape(format!(
                "sequence holds {} values, expected {n_frames} frames x {input}",
                seq.len()
            )));
        }

        let mut cache = LstmCache {
            n_frames,
            inputs: seq.to_vec(),
            gate_i: vec![T::zero(); n_frames * h],
            gate_f: vec![T::zero(); n_frames * h],
            gate_g: vec![T::zero(); n_frames * h],
            gate_o: vec![T::zero(); n_frames * h],
            cells: vec![T::zero(); n_frames * h],
            tanh_cells: vec![T::zero(); n_frames * h],
            hidden: vec![T::zero(); n_frames * h],
        };

        let mut h_prev = vec![T::zero(); h];
        let mut c_prev = vec![T::zero(); h];
        let mut z = vec![T::zero(); 4 * h];
        for t in 0..n_frames {
            let x_t = &seq[t * input..(t + 1) * input];
            self.input_weights.matvec_into(x_t, &mut z);
            self.recurrent_weights.matvec_add_into(&h_prev, &mut z);
            for (slot, &b) in z.iter_mut().zip(&self.bias) {
                *slot += b;
            }
            let row = t * h;
            for d in 0..h {
                let i = sigmoid(z[d]);
                let f = sigmoid(z[h + d]);
                let g = z[2 * h + d].tanh();
                let o = sigmoid(z[3 * h + d]);
                let c = f * c_prev[d] + i * g;
                let tc = c.tanh();
                cache.gate_i[row + d] = i;
                cache.gate_f[row + d] = f;
                cache.gate_g[row + d] = g;
                cache.gate_o[row + d] = o;
                cache.cells[row + d] = c;
                cache.tanh_cells[row + d] = tc;
                cache.hidden[row + d] = o * tc;
            }
            c_prev.copy_from_slice(&cache.cells[row..row + h]);
            h_prev.copy_from_slice(&cache.hidden[row..row + h]);
        }

        Ok((cache.hidden.clone(), cache))
    }

    /// Backpropagates `d_hidden` (`frames x H`) through the recurrence,
    /// accumulating parameter gradients into `grad` and returning the
    /// gradient with respect to the layer input (`frames x input`).
    pub fn backward(&self, cache: &LstmCache<T>, d_hidden: &[T], grad: &mut LstmGrad<T>) -> Vec<T> {
        let h = self.hidden_units();
        let input = self.input_units();
        let n = cache.n_frames;
        debug_assert_eq!(d_hidden.len(), n * h);

        let mut d_input = vec![T::zero(); n * input];
        let mut dh_rec = vec![T::zero(); h];
        let mut dc_rec = vec![T::zero(); h];
        let mut dz = vec![T::zero(); 4 * h];
        for t in (0..n).rev() {
            let row = t * h;
            for d in 0..h {
                let i = cache.gate_i[row + d];
                let f = cache.gate_f[row + d];
                let g = cache.gate_g[row + d];
                let o = cache.gate_o[row + d];
                let tc = cache.tanh_cells[row + d];
                let c_prev = if t == 0 { T::zero() } else { cache.cells[row - h + d] };

                let dh = d_hidden[row + d] + dh_rec[d];
                let dc = dc_rec[d] + dh * o * (T::one() - tc * tc);
                let d_o = dh * tc;
                let d_i = dc * g;
                let d_f = dc * c_prev;
                let d_g = dc * i;

                dz[d] = d_i * i * (T::one() - i);
                dz[h + d] = d_f * f * (T::one() - f);
                dz[2 * h + d] = d_g * (T::one() - g * g);
                dz[3 * h + d] = d_o * o * (T::one() - o);
                dc_rec[d] = dc * f;
            }

            let x_t = &cache.inputs[t * input..(t + 1) * input];
            grad.input_weights.add_outer(&dz, x_t);
            if t > 0 {
                let h_prev = &cache.hidden[(t - 1) * h..t * h];
                grad.recurrent_weights.add_outer(&dz, h_prev);
            }
            for (slot, &v) in grad.bias.iter_mut().zip(&dz) {
                *slot += v;
            }

            self.input_weights
                .matvec_t_add_into(&dz, &mut d_input[t * input..(t + 1) * input]);
            dh_rec.fill(T::zero());
            self.recurrent_weights.matvec_t_add_into(&dz, &mut dh_rec);
        }
        d_input
    }
}
