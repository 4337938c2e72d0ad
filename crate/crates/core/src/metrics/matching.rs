use crate::geom::{iou_1d_dimension, iou_3d, iou_aligned, iou_rotated, GeomError, DEGENERATE_AREA};

use super::{Difficulty, EvalConfig, GroundTruthObject, MetricKind, Prediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    TruePositive,
    FalsePositive,
    /// Matched out-of-bucket ground truth, lies outside the bucket itself, or
    /// is not of the target class.
    Ignored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatch {
    /// One verdict per input prediction, in input order.
    pub verdicts: Vec<Verdict>,
    /// One flag per input ground-truth object, in input order.
    pub gt_matched: Vec<bool>,
}

/// IoU between a ground-truth box and a prediction under `kind`.
///
/// The projected kinds (side, front and the single dimensions) drop at least
/// one horizontal axis, so they only compare boxes whose footprints overlap.
/// A pair with disjoint footprints scores 0; otherwise a car across the road,
/// or forty meters further down the same lane, could absorb a prediction.
pub fn metric_iou(
    kind: MetricKind,
    gt: &GroundTruthObject,
    pred: &Prediction,
) -> Result<f64, GeomError> {
    let (g, p) = (&gt.bbox, &pred.bbox);
    match kind {
        MetricKind::ThreeD => iou_3d(g, p),
        MetricKind::Bev => iou_rotated(&g.bev_footprint(), &p.bev_footprint()),
        _ if g.bev_footprint().intersection_area(&p.bev_footprint()) <= DEGENERATE_AREA => Ok(0.0),
        MetricKind::Side => iou_aligned(&g.side_view_rect(), &p.side_view_rect()),
        MetricKind::Front => iou_aligned(&g.front_view_rect(), &p.front_view_rect()),
        MetricKind::Length | MetricKind::Width | MetricKind::Height => {
            Ok(iou_1d_dimension(g, p, kind.dimension().expect("dimension kind")))
        }
    }
}

/// Prediction indices ordered by descending score, ties by input index.
pub(crate) fn score_order(preds: &[Prediction]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    // stable sort keeps input order among equal scores
    order.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score));
    order
}

/// IoU table `[pred][gt]` for target-class pairs; other pairs are `None`.
pub(crate) fn iou_table(
    preds: &[Prediction],
    gts: &[GroundTruthObject],
    kind: MetricKind,
    target_class: &str,
) -> Result<Vec<Vec<Option<f64>>>, GeomError> {
    preds
        .iter()
        .map(|p| {
            gts.iter()
                .map(|g| {
                    if p.class_label == target_class && g.class_label == target_class {
                        metric_iou(kind, g, p).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect()
        })
        .collect()
}

pub(crate) fn match_with_table(
    preds: &[Prediction],
    gts: &[GroundTruthObject],
    table: &[Vec<Option<f64>>],
    order: &[usize],
    threshold: f64,
    difficulty: Difficulty,
    cfg: &EvalConfig,
) -> FrameMatch {
    let in_bucket: Vec<bool> = gts.iter().map(|g| cfg.in_bucket(g, difficulty)).collect();
    let mut gt_matched = vec![false; gts.len()];
    let mut verdicts = vec![Verdict::Ignored; preds.len()];

    for &pi in order {
        if preds[pi].class_label != cfg.target_class {
            continue;
        }
        // highest IoU wins; ties go to the earlier ground truth
        let mut best: Option<(usize, f64)> = None;
        for (gi, iou) in table[pi].iter().enumerate() {
            let Some(iou) = *iou else { continue };
            if gt_matched[gi] || iou < threshold {
                continue;
            }
            if best.is_none_or(|(_, b)| iou > b) {
                best = Some((gi, iou));
            }
        }
        verdicts[pi] = match best {
            Some((gi, _)) => {
                gt_matched[gi] = true;
                if in_bucket[gi] {
                    Verdict::TruePositive
                } else {
                    Verdict::Ignored
                }
            }
            None if cfg.depth_in_bucket(preds[pi].depth(), difficulty) => Verdict::FalsePositive,
            None => Verdict::Ignored,
        };
    }
    FrameMatch {
        verdicts,
        gt_matched,
    }
}

/// Greedy score-ordered matching of one frame's predictions to its ground
/// truth under one metric kind and difficulty.
///
/// Each prediction takes the unmatched target-class ground truth with the
/// highest IoU at or above the threshold. If that object is outside the
/// difficulty bucket it is still consumed, and the prediction is ignored.
/// An unmatched prediction is a false positive only if its own depth falls
/// inside the bucket.
pub fn match_frame(
    preds: &[Prediction],
    gts: &[GroundTruthObject],
    kind: MetricKind,
    difficulty: Difficulty,
    cfg: &EvalConfig,
) -> Result<FrameMatch, GeomError> {
    let table = iou_table(preds, gts, kind, &cfg.target_class)?;
    let order = score_order(preds);
    Ok(match_with_table(
        preds,
        gts,
        &table,
        &order,
        cfg.threshold(kind),
        difficulty,
        cfg,
    ))
}
