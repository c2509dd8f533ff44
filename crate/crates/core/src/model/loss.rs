//! Class-weighted cross-entropy and the prevalence-derived arousal weight.

use crate::error::{Error, Result};
use crate::num::{cast, Scalar};

/// Weighted cross-entropy over per-frame class distributions.
///
/// Returns `(normalized_loss, per_frame_losses)` where the scalar is
/// `sum_t w[y_t] * (-ln p_t[y_t]) / sum_t w[y_t]`. PAD frames (weight 0)
/// contribute exactly zero to both sums.
pub fn weighted_cross_entropy<T: Scalar>(
    probs: &[T],
    targets: &[u8],
    weights: &[T; 3],
) -> Result<(T, Vec<T>)> {
    if probs.len() != targets.len() * 3 {
        return Err(Error::Shape(format!(
            "{} probabilities for {} targets",
            probs.len(),
            targets.len()
        )));
    }
    let mut total = T::zero();
    let mut weight_sum = T::zero();
    let mut per_frame = Vec::with_capacity(targets.len());
    for (t, &y) in targets.iter().enumerate() {
        if y > 2 {
            return Err(Error::Input(format!("unknown target {y} at frame {t}")));
        }
        let w = weights[y as usize];
        let frame_loss = if w == T::zero() {
            T::zero()
        } else {
            let p = probs[t * 3 + y as usize].max(T::min_positive_value());
            w * -p.ln()
        };
        per_frame.push(frame_loss);
        total += frame_loss;
        weight_sum += w;
    }
    if weight_sum == T::zero() {
        return Err(Error::DegenerateBatch(
            "every frame carries zero loss weight".into(),
        ));
    }
    Ok((total / weight_sum, per_frame))
}

/// Arousal class weight derived from training-fold prevalence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrevalenceWeights {
    /// `[w_pad, w_non_arousal, w_arousal] = [0, 1, w]`.
    pub weights: [f64; 3],
    /// Set when the raw ratio fell outside `[1, 1000]` (including the
    /// no-arousal case, which returns the clamp maximum).
    pub clamped: bool,
}

/// `w_arousal = round(n_non_arousal / n_arousal)` over non-PAD frames,
/// rounded half away from zero and clamped to `[1, 1000]`.
pub fn class_weight_from_prevalence(frame_targets: &[u8]) -> Result<PrevalenceWeights> {
    let n_non = frame_targets.iter().filter(|&&t| t == 1).count();
    let n_arousal = frame_targets.iter().filter(|&&t| t == 2).count();
    if n_non + n_arousal == 0 {
        return Err(Error::Input("no non-PAD frames".into()));
    }
    let (raw, clamped) = if n_arousal == 0 {
        (1000.0, true)
    } else {
        let ratio = (n_non as f64 / n_arousal as f64).round();
        let clamped = !(1.0..=1000.0).contains(&ratio);
        (ratio.clamp(1.0, 1000.0), clamped)
    };
    Ok(PrevalenceWeights {
        weights: [0.0, 1.0, raw],
        clamped,
    })
}

/// Widens `[f64; 3]` loss weights to the working scalar.
pub fn cast_weights<T: Scalar>(weights: &[f64; 3]) -> [T; 3] {
    [cast(weights[0]), cast(weights[1]), cast(weights[2])]
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: [f64; 3] = [0.0, 1.0, 14.0];

    #[test]
    fn confident_correct_frame_has_zero_loss() {
        let (loss, per) =
            weighted_cross_entropy(&[0.0, 0.0, 1.0], &[2], &cast_weights(&W)).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(per, vec![0.0]);
    }

    #[test]
    fn pad_frames_contribute_exactly_zero() {
        let probs = [0.9, 0.05, 0.05, 0.1, 0.2, 0.7];
        let (loss_with_pad, per) =
            weighted_cross_entropy(&probs, &[0, 2], &cast_weights(&W)).unwrap();
        assert_eq!(per[0], 0.0);
        let (loss_alone, _) =
            weighted_cross_entropy(&probs[3..], &[2], &cast_weights(&W)).unwrap();
        assert_eq!(loss_with_pad, loss_alone);
    }

    #[test]
    fn single_arousal_frame_at_half_confidence_gives_ln2() {
        let (loss, per) =
            weighted_cross_entropy(&[0.25, 0.25, 0.5], &[2], &cast_weights(&W)).unwrap();
        assert!((loss - 2f64.ln()).abs() < 1e-12, "loss = {loss}");
        assert!((per[0] - 14.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn all_pad_batch_is_degenerate() {
        assert!(matches!(
            weighted_cross_entropy(&[0.4, 0.3, 0.3, 0.2, 0.4, 0.4], &[0, 0], &cast_weights(&W)),
            Err(Error::DegenerateBatch(_))
        ));
    }

    #[test]
    fn prevalence_weight_cases() {
        let mut targets = vec![1u8; 14];
        targets.push(2);
        assert_eq!(
            class_weight_from_prevalence(&targets).unwrap(),
            PrevalenceWeights {
                weights: [0.0, 1.0, 14.0],
                clamped: false
            }
        );

        assert_eq!(
            class_weight_from_prevalence(&[1, 2]).unwrap().weights,
            [0.0, 1.0, 1.0]
        );

        // 7 non-arousal to 2 arousal: 3.5 rounds half away from zero to 4.
        let mut targets = vec![1u8; 7];
        targets.extend([2, 2]);
        assert_eq!(
            class_weight_from_prevalence(&targets).unwrap().weights[2],
            4.0
        );

        let no_arousal = class_weight_from_prevalence(&[1, 1, 1]).unwrap();
        assert_eq!(no_arousal.weights[2], 1000.0);
        assert!(no_arousal.clamped);

        assert!(matches!(
            class_weight_from_prevalence(&[0, 0]),
            Err(Error::Input(_))
        ));
    }
}
