//! Gross (frame-pooled) AUROC and AUPRC with exact tie handling.
//!
//! AUROC uses the Mann-Whitney formulation (sort + average ranks over tie
//! blocks), AUPRC is average precision with equal scores treated as one
//! threshold block and step-wise integration (no linear interpolation).
//! Both are rank-based, hence exactly invariant under strictly increasing
//! score transforms. Scores are widened to `f64` before comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Pooled evaluation over one or more records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub auroc: f64,
    pub auprc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub prevalence: f64,
    /// `(fpr, tpr)` per distinct threshold, descending score order.
    pub roc_points: Vec<(f64, f64)>,
    /// `(recall, precision)` per distinct threshold, descending score order.
    pub pr_points: Vec<(f64, f64)>,
}

/// Per-record scores to pool into a gross report.
#[derive(Debug, Clone, Copy)]
pub struct RecordScores<'a, T> {
    pub record_id: &'a str,
    /// Arousal score per frame.
    pub scores: &'a [T],
    /// Frame labels: 0 PAD (excluded), 1 negative, 2 positive.
    pub frame_labels: &'a [u8],
}

fn checked_pairs<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<Vec<(f64, bool)>> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    scores
        .iter()
        .zip(labels)
        .map(|(s, &l)| {
            let v = s.to_f64().unwrap_or(f64::NAN);
            if v.is_nan() {
                Err(Error::Input("NaN score".into()))
            } else {
                Ok((v, l))
            }
        })
        .collect()
}

/// Area under the ROC curve, exact under ties:
/// `(#{pos > neg} + 0.5 * #{ties}) / (n_pos * n_neg)`.
pub fn auroc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<f64> {
    let mut pairs = checked_pairs(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUROC needs both classes, got {n_pos} positives and {n_neg} negatives"
        )));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Average 1-based ranks over tie blocks, summed over positives.
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        let avg_rank = (i + j + 1) as f64 / 2.0;
        rank_sum += avg_rank * pairs[i..j].iter().filter(|(_, l)| *l).count() as f64;
        i = j;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Average precision: step-wise sum of precision at each positive, with tie
/// blocks collapsed to a single threshold.
pub fn auprc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<f64> {
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 {
        return Err(Error::UndefinedMetric("AUPRC needs at least one positive".into()));
    }
    let blocks = threshold_blocks(checked_pairs(scores, labels)?);
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut ap = 0.0f64;
    for (block_tp, block_fp) in blocks {
        tp += block_tp;
        fp += block_fp;
        if block_tp > 0 {
            let precision = tp as f64 / (tp + fp) as f64;
            ap += block_tp as f64 * precision;
        }
    }
    Ok(ap / n_pos as f64)
}

/// `(tp, fp)` counts per distinct score, descending.
fn threshold_blocks(mut pairs: Vec<(f64, bool)>) -> Vec<(usize, usize)> {
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        let mut tp = 0;
        let mut fp = 0;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            if pairs[j].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        blocks.push((tp, fp));
        i = j;
    }
    blocks
}

/// Pools frames across records (record-id order), drops PAD frames, maps
/// label 2 to positive and 1 to negative, and evaluates both metrics plus
/// curve points on the pooled vectors.
pub fn gross_metrics<T: Scalar>(records: &[RecordScores<'_, T>]) -> Result<MetricsReport> {
    if records.is_empty() {
        return Err(Error::Input("no records to evaluate".into()));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].record_id.cmp(records[b].record_id));

    let mut scores: Vec<T> = Vec::new();
    let mut labels: Vec<bool> = Vec::new();
    for &i in &order {
        let rec = &records[i];
        if rec.scores.len() != rec.frame_labels.len() {
            return Err(Error::Shape(format!(
                "record {}: {} scores vs {} labels",
                rec.record_id,
                rec.scores.len(),
                rec.frame_labels.len()
            )));
        }
        for (s, &l) in rec.scores.iter().zip(rec.frame_labels) {
            match l {
                0 => {}
                1 => {
                    scores.push(*s);
                    labels.push(false);
                }
                2 => {
                    scores.push(*s);
                    labels.push(true);
                }
                other => {
                    return Err(Error::Input(format!(
                        "record {}: unknown frame label {other}",
                        rec.record_id
                    )))
                }
            }
        }
    }

    let auroc = auroc(&scores, &labels)?;
    let auprc = auprc(&scores, &labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;

    let blocks = threshold_blocks(checked_pairs(&scores, &labels)?);
    let mut roc_points = vec![(0.0, 0.0)];
    let mut pr_points = Vec::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    for (btp, bfp) in blocks {
        tp += btp;
        fp += bfp;
        roc_points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        pr_points.push((tp as f64 / n_pos as f64, tp as f64 / (tp + fp) as f64));
    }

    Ok(MetricsReport {
        auroc,
        auprc,
        n_pos,
        n_neg,
        prevalence: n_pos as f64 / (n_pos + n_neg) as f64,
        roc_points,
        pr_points,
    })
}
