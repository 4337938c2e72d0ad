mod common;

use crossdet::metrics::{
    assign_difficulty, average_precision, evaluate, evaluate_with, match_frame, pr_curve, Difficulty,
    EvalConfig, EvalError, FrameSet, GroundTruthObject, MetricKind, Prediction, RecallPoints,
    ScoredVerdict, Verdict,
};
use crossdet::simulate::{run_experiment, SimConfig};
use crossdet::Execution;
use proptest::prelude::*;

use common::{car, definition_ap, three_frame_fixture};

/// A small noisy simulated evaluation input.
fn scene(seed: u64, frames: usize) -> (FrameSet<GroundTruthObject>, FrameSet<Prediction>) {
    let mut c = SimConfig::from_presets("nuscenes", "kitti").unwrap();
    c.frames = frames;
    c.seed = seed;
    c.center_noise = 0.3;
    c.yaw_noise = 0.05;
    c.spawn_rate = 0.2;
    c.drop_rate = 0.1;
    let r = run_experiment(&c).unwrap();
    (r.ground_truth, r.predictions)
}

fn all_aps(gt: &FrameSet<GroundTruthObject>, pred: &FrameSet<Prediction>, cfg: &EvalConfig) -> Vec<Option<f64>> {
    evaluate(gt, pred, cfg).unwrap().cells.iter().map(|c| c.ap).collect()
}

#[test]
fn difficulty_examples() {
    let cfg = EvalConfig::default();
    let at = |d: f64| GroundTruthObject::new(car(d, 0.0, 0.0), "Car");
    assert_eq!(assign_difficulty(&at(25.0), &cfg), Difficulty::ALL.to_vec());
    assert_eq!(assign_difficulty(&at(50.0), &cfg), vec![Difficulty::Moderate, Difficulty::Hard]);
    assert!(assign_difficulty(&at(80.0), &cfg).is_empty());
    // depth is horizontal distance, so a car behind the sensor counts too
    assert_eq!(assign_difficulty(&at(-25.0), &cfg).len(), 3);
}

#[test]
fn pr_examples() {
    let sv = |score, verdict| ScoredVerdict { score, verdict };
    let c = pr_curve(&[sv(0.9, Verdict::TruePositive)], 1);
    assert_eq!((c.points[0].precision, c.points[0].recall), (1.0, 1.0));
    let c = pr_curve(&[sv(0.9, Verdict::TruePositive), sv(0.95, Verdict::FalsePositive)], 1);
    assert_eq!(c.points.last().unwrap().precision, 0.5);
    assert_eq!(average_precision(&c, RecallPoints::R40), Some(50.0));
    let c = pr_curve(&[], 3);
    assert!(c.points.is_empty());
    assert_eq!(average_precision(&c, RecallPoints::R40), Some(0.0));
    assert_eq!(average_precision(&pr_curve(&[], 0), RecallPoints::R40), None);
}

#[test]
fn three_frame_fixture_values() {
    let (gt, pred) = three_frame_fixture();
    let r = evaluate(&gt, &pred, &EvalConfig::default()).unwrap();
    for d in Difficulty::ALL {
        for k in [MetricKind::Bev, MetricKind::Length, MetricKind::Width] {
            assert_eq!(r.ap(k, d), Some(100.0), "{k}");
        }
        for k in [MetricKind::ThreeD, MetricKind::Side, MetricKind::Front, MetricKind::Height] {
            assert!((r.ap(k, d).unwrap() - 68.75).abs() < 1e-9, "{k}");
        }
    }
    assert!(r.ap(MetricKind::ThreeD, Difficulty::Easy) < r.ap(MetricKind::Bev, Difficulty::Easy));
}

#[test]
fn identical_and_empty_predictions() {
    let (gt, _) = scene(3, 30);
    let pred: FrameSet<Prediction> = gt
        .iter()
        .map(|(k, v)| (k.clone(), v.iter().map(|g| Prediction::new(g.bbox, "Car", 0.5)).collect()))
        .collect();
    let r = evaluate(&gt, &pred, &EvalConfig::default()).unwrap();
    assert!(r.cells.iter().all(|c| c.ap == Some(100.0)));
    let r = evaluate(&gt, &FrameSet::new(), &EvalConfig::default()).unwrap();
    assert!(r.cells.iter().all(|c| c.ap == Some(0.0)));
}

#[test]
fn unknown_prediction_frames_are_reported() {
    let (gt, mut pred) = scene(4, 5);
    pred.insert("zzz".into(), vec![]);
    pred.insert("yyy".into(), vec![]);
    match evaluate(&gt, &pred, &EvalConfig::default()) {
        Err(EvalError::UnknownFrames(ids)) => assert_eq!(ids, vec!["yyy", "zzz"]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let (gt, pred) = scene(5, 80);
    let cfg = EvalConfig::default();
    let a = evaluate_with(&gt, &pred, &cfg, Execution::Sequential).unwrap();
    let b = evaluate_with(&gt, &pred, &cfg, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, evaluate_with(&gt, &pred, &cfg, Execution::Sequential).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn raising_a_tp_score_never_lowers_ap(seed in 0u64..1000, pick in 0usize..1000, kind in 0usize..7) {
        let (gt, pred) = scene(seed, 6);
        let kind = MetricKind::ALL[kind];
        let cfg = EvalConfig { metrics: vec![kind], ..EvalConfig::default() };
        let mut tps = Vec::new();
        for (id, preds) in &pred {
            let m = match_frame(preds, &gt[id], kind, Difficulty::Moderate, &cfg).unwrap();
            for (i, v) in m.verdicts.iter().enumerate() {
                if *v == Verdict::TruePositive {
                    tps.push((id.clone(), i));
                }
            }
        }
        prop_assume!(!tps.is_empty());
        let (id, i) = &tps[pick % tps.len()];
        let mut boosted = pred.clone();
        let p = &mut boosted.get_mut(id).unwrap()[*i];
        p.score = (p.score + 0.5).min(1.0);
        let before = evaluate(&gt, &pred, &cfg).unwrap();
        let after = evaluate(&gt, &boosted, &cfg).unwrap();
        for (b, a) in before.cells.iter().zip(&after.cells) {
            prop_assert!(a.ap.unwrap_or(0.0) + 1e-9 >= b.ap.unwrap_or(0.0), "{:?} {:?}", b.metric, b.difficulty);
        }
    }

    #[test]
    fn duplicate_never_raises_ap(seed in 0u64..1000) {
        let (gt, pred) = scene(seed, 6);
        let cfg = EvalConfig::default();
        let before = evaluate(&gt, &pred, &cfg).unwrap();
        let mut dup = pred.clone();
        for preds in dup.values_mut() {
            if let Some(p) = preds.first().cloned() {
                preds.push(Prediction::new(p.bbox, "Car", p.score * 0.5));
            }
        }
        let after = evaluate(&gt, &dup, &cfg).unwrap();
        for (b, a) in before.cells.iter().zip(&after.cells) {
            prop_assert!(a.ap.unwrap_or(0.0) <= b.ap.unwrap_or(0.0) + 1e-9);
        }
    }

    #[test]
    fn ap_non_increasing_in_box_threshold(seed in 0u64..1000, lo in 0.3..0.7f64, step in 0.0..0.25f64) {
        let (gt, pred) = scene(seed, 6);
        let at = |t: f64| all_aps(&gt, &pred, &EvalConfig { box_iou_threshold: t, dim_iou_threshold: t, ..EvalConfig::default() });
        for (a, b) in at(lo).iter().zip(at(lo + step)) {
            prop_assert!(b.unwrap_or(0.0) <= a.unwrap_or(0.0) + 1e-9);
        }
    }

    #[test]
    fn buckets_nest(seed in 0u64..1000) {
        let (gt, pred) = scene(seed, 8);
        let r = evaluate(&gt, &pred, &EvalConfig::default()).unwrap();
        for k in MetricKind::ALL {
            let e = r.cell(k, Difficulty::Easy).unwrap();
            let m = r.cell(k, Difficulty::Moderate).unwrap();
            let h = r.cell(k, Difficulty::Hard).unwrap();
            prop_assert!(e.gt_count <= m.gt_count);
            prop_assert_eq!((m.ap, m.gt_count, m.prediction_count), (h.ap, h.gt_count, h.prediction_count));
            prop_assert_eq!(&m.curve, &h.curve);
        }
    }

    #[test]
    fn ap_matches_its_definition(hits in proptest::collection::vec(any::<bool>(), 0..40), extra in 0usize..5) {
        // distinct descending scores
        let verdicts: Vec<ScoredVerdict> = hits
            .iter()
            .enumerate()
            .map(|(i, h)| ScoredVerdict {
                score: 1.0 - i as f64 / 100.0,
                verdict: if *h { Verdict::TruePositive } else { Verdict::FalsePositive },
            })
            .collect();
        let gt = hits.iter().filter(|h| **h).count() + extra;
        prop_assume!(gt > 0);
        let ap = average_precision(&pr_curve(&verdicts, gt), RecallPoints::R40).unwrap();
        let want = definition_ap(&hits, gt, &common::r40());
        prop_assert!((ap - want).abs() < 1e-9, "{ap} vs {want}");
        let r11: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let ap11 = average_precision(&pr_curve(&verdicts, gt), RecallPoints::R11).unwrap();
        prop_assert!((ap11 - definition_ap(&hits, gt, &r11)).abs() < 1e-9);
    }
}
