use serde::{Deserialize, Serialize};

use super::{RecallPoints, Verdict};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredVerdict {
    pub score: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub score_cutoff: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    /// Ordered by decreasing score cutoff, so recall is non-decreasing.
    pub points: Vec<PrPoint>,
    pub gt_count: usize,
}

impl PrCurve {
    /// A curve over zero ground truth has no defined AP.
    pub fn is_defined(&self) -> bool {
        self.gt_count > 0
    }
}

/// Builds the precision/recall curve, with one point per distinct score at
/// which a true positive occurs. Ignored verdicts count toward nothing.
///
/// Verdicts are sorted by descending score with a stable sort, so callers
/// control tie order through the input order.
pub fn pr_curve(verdicts: &[ScoredVerdict], gt_count: usize) -> PrCurve {
    let mut ranked: Vec<&ScoredVerdict> = verdicts
        .iter()
        .filter(|v| v.verdict != Verdict::Ignored)
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut points = Vec::new();
    if gt_count == 0 {
        return PrCurve { points, gt_count };
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < ranked.len() {
        let cutoff = ranked[i].score;
        let mut group_has_tp = false;
        while i < ranked.len() && ranked[i].score == cutoff {
            match ranked[i].verdict {
                Verdict::TruePositive => {
                    tp += 1;
                    group_has_tp = true;
                }
                Verdict::FalsePositive => fp += 1,
                Verdict::Ignored => unreachable!("filtered above"),
            }
            i += 1;
        }
        if group_has_tp {
            points.push(PrPoint {
                score_cutoff: cutoff,
                precision: tp as f64 / (tp + fp) as f64,
                recall: tp as f64 / gt_count as f64,
            });
        }
    }
    PrCurve { points, gt_count }
}

/// Interpolated AP in percent: mean over the recall levels of the maximum
/// precision at recall ≥ level (0 where unreachable). `None` when the curve
/// has no ground truth.
pub fn average_precision(curve: &PrCurve, recall_points: RecallPoints) -> Option<f64> {
    if !curve.is_defined() {
        return None;
    }
    let levels = recall_points.levels();
    // envelope from the high-recall end
    let mut envelope = vec![0.0; curve.points.len()];
    let mut running = 0.0f64;
    for (k, p) in curve.points.iter().enumerate().rev() {
        running = running.max(p.precision);
        envelope[k] = running;
    }
    let mut sum = 0.0;
    for r in &levels {
        let first = curve.points.partition_point(|p| p.recall < *r);
        if first < envelope.len() {
            sum += envelope[first];
        }
    }
    Some(100.0 * sum / levels.len() as f64)
}
