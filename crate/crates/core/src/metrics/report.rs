use serde::{Deserialize, Serialize};

use crate::exec::Execution;

use super::matching::{iou_table, match_with_table, score_order};
use super::pr::{average_precision, pr_curve, PrCurve, ScoredVerdict};
use super::{
    Difficulty, EvalConfig, EvalError, FrameSet, GroundTruthObject, MetricKind, Prediction,
    Verdict,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApCell {
    pub metric: MetricKind,
    pub difficulty: Difficulty,
    /// Percentage in [0, 100]; `None` when the bucket holds no ground truth.
    pub ap: Option<f64>,
    pub gt_count: usize,
    /// True and false positives; ignored predictions are not counted.
    pub prediction_count: usize,
    pub curve: PrCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub config: EvalConfig,
    /// Ordered by `config.metrics`, then Easy, Moderate, Hard.
    pub cells: Vec<ApCell>,
}

impl ApReport {
    pub fn cell(&self, metric: MetricKind, difficulty: Difficulty) -> Option<&ApCell> {
        self.cells
            .iter()
            .find(|c| c.metric == metric && c.difficulty == difficulty)
    }

    pub fn ap(&self, metric: MetricKind, difficulty: Difficulty) -> Option<f64> {
        self.cell(metric, difficulty).and_then(|c| c.ap)
    }

    pub fn metrics(&self) -> &[MetricKind] {
        &self.config.metrics
    }
}

/// Per-frame verdicts indexed `[metric][difficulty]`.
type FrameVerdicts = Vec<[Vec<ScoredVerdict>; 3]>;

pub fn evaluate(
    gt_frames: &FrameSet<GroundTruthObject>,
    pred_frames: &FrameSet<Prediction>,
    cfg: &EvalConfig,
) -> Result<ApReport, EvalError> {
    evaluate_with(gt_frames, pred_frames, cfg, Execution::default())
}

/// Runs matching, PR construction and AP for every configured metric and
/// difficulty. Frames are matched independently (in parallel when `exec`
/// allows) and merged in frame-id order, so the report does not depend on
/// the execution mode.
pub fn evaluate_with(
    gt_frames: &FrameSet<GroundTruthObject>,
    pred_frames: &FrameSet<Prediction>,
    cfg: &EvalConfig,
    exec: Execution,
) -> Result<ApReport, EvalError> {
    cfg.validate()?;
    let unknown: Vec<String> = pred_frames
        .keys()
        .filter(|id| !gt_frames.contains_key(*id))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(EvalError::UnknownFrames(unknown));
    }
    for preds in pred_frames.values() {
        if let Some(p) = preds.iter().find(|p| !p.score.is_finite()) {
            return Err(EvalError::Input(format!("non-finite score {}", p.score)));
        }
    }

    let frames: Vec<(&Vec<GroundTruthObject>, &[Prediction])> = gt_frames
        .iter()
        .map(|(id, gts)| (gts, pred_frames.get(id).map(Vec::as_slice).unwrap_or(&[])))
        .collect();

    let per_frame: Vec<Result<FrameVerdicts, EvalError>> =
        exec.map(&frames, |(gts, preds)| frame_verdicts(gts, preds, cfg));

    let n_kinds = cfg.metrics.len();
    let mut merged: Vec<[Vec<ScoredVerdict>; 3]> = (0..n_kinds).map(|_| Default::default()).collect();
    for fv in per_frame {
        for (k, by_diff) in fv?.into_iter().enumerate() {
            for (d, vs) in by_diff.into_iter().enumerate() {
                merged[k][d].extend(vs);
            }
        }
    }

    let mut gt_counts = [0usize; 3];
    for gts in gt_frames.values() {
        for g in gts.iter().filter(|g| g.class_label == cfg.target_class) {
            for d in Difficulty::ALL {
                if cfg.in_bucket(g, d) {
                    gt_counts[d.index()] += 1;
                }
            }
        }
    }

    let mut cells = Vec::with_capacity(n_kinds * 3);
    for (k, kind) in cfg.metrics.iter().enumerate() {
        for d in Difficulty::ALL {
            let verdicts = &merged[k][d.index()];
            let curve = pr_curve(verdicts, gt_counts[d.index()]);
            cells.push(ApCell {
                metric: *kind,
                difficulty: d,
                ap: average_precision(&curve, cfg.recall_points),
                gt_count: gt_counts[d.index()],
                prediction_count: verdicts
                    .iter()
                    .filter(|v| v.verdict != Verdict::Ignored)
                    .count(),
                curve,
            });
        }
    }
    Ok(ApReport {
        config: cfg.clone(),
        cells,
    })
}

fn frame_verdicts(
    gts: &[GroundTruthObject],
    preds: &[Prediction],
    cfg: &EvalConfig,
) -> Result<FrameVerdicts, EvalError> {
    let order = score_order(preds);
    let mut out = Vec::with_capacity(cfg.metrics.len());
    for &kind in &cfg.metrics {
        let table = iou_table(preds, gts, kind, &cfg.target_class)?;
        let by_diff = Difficulty::ALL.map(|d| {
            let m = match_with_table(preds, gts, &table, &order, cfg.threshold(kind), d, cfg);
            // keep input order; the global stable sort then breaks score ties
            // by (frame id, input index)
            preds
                .iter()
                .zip(m.verdicts)
                .filter(|(_, v)| *v != Verdict::Ignored)
                .map(|(p, verdict)| ScoredVerdict {
                    score: p.score,
                    verdict,
                })
                .collect()
        });
        out.push(by_diff);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Box3D;

    fn car(x: f64, y: f64, z: f64) -> Box3D {
        Box3D::new([x, y, z], 4.0, 1.8, 1.5, 0.0).unwrap()
    }

    #[test]
    fn identical_predictions_score_100() {
        let mut gt = FrameSet::new();
        let mut pr = FrameSet::new();
        for f in 0..3 {
            let objs: Vec<GroundTruthObject> = (0..3)
                .map(|i| GroundTruthObject::new(car(5.0 + 10.0 * i as f64, f as f64, 0.75), "Car"))
                .collect();
            pr.insert(
                format!("{f}"),
                objs.iter()
                    .enumerate()
                    .map(|(i, g)| Prediction::new(g.bbox, "Car", 0.5 + 0.1 * i as f64))
                    .collect(),
            );
            gt.insert(format!("{f}"), objs);
        }
        let r = evaluate(&gt, &pr, &EvalConfig::default()).unwrap();
        assert_eq!(r.cells.len(), 21);
        for c in &r.cells {
            assert_eq!(c.ap, Some(100.0), "{:?}", (c.metric, c.difficulty));
        }
    }

    #[test]
    fn empty_predictions_score_zero() {
        let mut gt = FrameSet::new();
        gt.insert("a".into(), vec![GroundTruthObject::new(car(10.0, 0.0, 0.75), "Car")]);
        let r = evaluate(&gt, &FrameSet::new(), &EvalConfig::default()).unwrap();
        assert!(r.cells.iter().all(|c| c.ap == Some(0.0)));
    }

    #[test]
    fn unknown_prediction_frames_are_rejected() {
        let mut gt = FrameSet::new();
        gt.insert("a".into(), vec![]);
        let mut pr = FrameSet::new();
        pr.insert("b".into(), vec![]);
        pr.insert("c".into(), vec![]);
        let err = evaluate(&gt, &pr, &EvalConfig::default()).unwrap_err();
        assert_eq!(err, EvalError::UnknownFrames(vec!["b".into(), "c".into()]));
    }

    #[test]
    fn zero_gt_bucket_is_undefined() {
        let mut gt = FrameSet::new();
        gt.insert("a".into(), vec![GroundTruthObject::new(car(50.0, 0.0, 0.75), "Car")]);
        let r = evaluate(&gt, &FrameSet::new(), &EvalConfig::default()).unwrap();
        assert_eq!(r.ap(MetricKind::ThreeD, Difficulty::Easy), None);
        assert_eq!(r.ap(MetricKind::ThreeD, Difficulty::Moderate), Some(0.0));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let mut gt = FrameSet::new();
        let mut pr = FrameSet::new();
        for f in 0..20 {
            let g: Vec<_> = (0..4)
                .map(|i| GroundTruthObject::new(car(8.0 * i as f64, f as f64 * 3.0, 0.75), "Car"))
                .collect();
            let p: Vec<_> = g
                .iter()
                .enumerate()
                .map(|(i, o)| {
                    Prediction::new(
                        o.bbox.translated([0.1 * i as f64, 0.05, 0.0]).unwrap(),
                        "Car",
                        ((f * 7 + i * 3) % 10) as f64 / 10.0,
                    )
                })
                .collect();
            gt.insert(format!("{f:03}"), g);
            pr.insert(format!("{f:03}"), p);
        }
        let cfg = EvalConfig::default();
        let a = evaluate_with(&gt, &pr, &cfg, Execution::Sequential).unwrap();
        let b = evaluate_with(&gt, &pr, &cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
