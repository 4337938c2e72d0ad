//! Box-level cross-domain experiment with a size-overfit detector.
//!
//! Ground truth is drawn from a target [`DatasetProfile`]; the simulated
//! detector blends every predicted size toward the source profile's mean by
//! `overfit_alpha`, adds center and heading jitter, and scores each box by
//! how close it is to its object. No points are simulated.
//!
//! Every random draw comes from a generator seeded by
//! `(seed, frame index, stream[, object index])`, so frames can be produced
//! in any order or in parallel with identical results.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::geom::{normalize_yaw, Box3D, Dimension};
use crate::harmonize::{
    builtin_profile, percentage_gap, size_statistics, DatasetProfile, HarmonizeError, SizeGap,
    DEFAULT_POINT_RANGE,
};
use crate::kv::{KvError, KvMap};
use crate::metrics::{evaluate_with, ApReport, EvalConfig, EvalError, FrameSet, GroundTruthObject, Prediction};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Harmonize(#[from] HarmonizeError),
    #[error(transparent)]
    Kv(#[from] KvError),
}

/// Smallest simulated box dimension (m).
pub const MIN_DIMENSION: f64 = 0.5;
/// Size draws are truncated at this many spreads from the mean.
pub const TRUNCATION_SPREADS: f64 = 3.0;

pub const DEFAULT_CENTER_NOISE: f64 = 0.1;
pub const DEFAULT_YAW_NOISE: f64 = 0.02;
pub const DEFAULT_HEADING_JITTER: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HeadingMode {
    /// Yaw uniform in (-π, π].
    Uniform,
    /// Yaw 0 or π with equal probability plus Gaussian jitter (radians),
    /// i.e. traffic along the sensor's forward axis.
    RoadAligned { jitter: f64 },
}

impl HeadingMode {
    fn to_kv_value(self) -> String {
        match self {
            HeadingMode::Uniform => "uniform".into(),
            HeadingMode::RoadAligned { jitter } => format!("road:{jitter}"),
        }
    }

    fn from_kv_value(s: &str) -> Option<Self> {
        if s == "uniform" {
            return Some(HeadingMode::Uniform);
        }
        let jitter: f64 = s.strip_prefix("road:")?.parse().ok()?;
        Some(HeadingMode::RoadAligned { jitter })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Training domain; the detector is biased toward its mean sizes.
    pub source: DatasetProfile,
    /// Evaluation domain; ground truth sizes are drawn from it.
    pub target: DatasetProfile,
    pub frames: usize,
    /// Inclusive range of cars per frame.
    pub cars_per_frame: (usize, usize),
    /// `[x_min, y_min, x_max, y_max]` for car centers.
    pub placement: [f64; 4],
    /// 1 predicts pure source-mean sizes, 0 predicts the true sizes.
    pub overfit_alpha: f64,
    /// Std of horizontal center jitter (m).
    pub center_noise: f64,
    /// Std of heading jitter (rad).
    pub yaw_noise: f64,
    pub heading: HeadingMode,
    /// Probability that a car gets no prediction.
    pub drop_rate: f64,
    /// Probability, per car, of an extra unmatched prediction.
    pub spawn_rate: f64,
    pub seed: u64,
    pub class_label: String,
}

impl SimConfig {
    pub fn new(source: DatasetProfile, target: DatasetProfile) -> Self {
        Self {
            source,
            target,
            frames: 200,
            cars_per_frame: (4, 12),
            placement: [-70.0, -70.0, 70.0, 70.0],
            overfit_alpha: 1.0,
            center_noise: DEFAULT_CENTER_NOISE,
            yaw_noise: DEFAULT_YAW_NOISE,
            heading: HeadingMode::RoadAligned {
                jitter: DEFAULT_HEADING_JITTER,
            },
            drop_rate: 0.0,
            spawn_rate: 0.0,
            seed: 0,
            class_label: "Car".into(),
        }
    }

    /// Built-in profiles by dataset name.
    pub fn from_presets(source: &str, target: &str) -> Option<Self> {
        Some(Self::new(builtin_profile(source)?, builtin_profile(target)?))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.source.validate()?;
        self.target.validate()?;
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.frames == 0 {
            return bad("frames must be at least 1".into());
        }
        if self.cars_per_frame.0 > self.cars_per_frame.1 {
            return bad(format!("cars_per_frame range {:?} is inverted", self.cars_per_frame));
        }
        if !(0.0..=1.0).contains(&self.overfit_alpha) {
            return bad(format!("overfit_alpha {} not in [0, 1]", self.overfit_alpha));
        }
        for (name, v) in [("center_noise", self.center_noise), ("yaw_noise", self.yaw_noise)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be nonnegative, got {v}"));
            }
        }
        if let HeadingMode::RoadAligned { jitter } = self.heading {
            if !(jitter.is_finite() && jitter >= 0.0) {
                return bad(format!("heading jitter must be nonnegative, got {jitter}"));
            }
        }
        for (name, v) in [("drop_rate", self.drop_rate), ("spawn_rate", self.spawn_rate)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} not in [0, 1]"));
            }
        }
        let p = self.placement;
        let r = DEFAULT_POINT_RANGE;
        if !(p[0] < p[2] && p[1] < p[3] && p[0] >= r[0] && p[1] >= r[1] && p[2] <= r[3] && p[3] <= r[4]) {
            return bad(format!("placement {p:?} must be a non-empty subset of the point range"));
        }
        if self.class_label.is_empty() {
            return bad("class label is empty".into());
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvMap {
        let mut m = KvMap::default();
        m.extend_section("source", &self.source.to_kv());
        m.extend_section("target", &self.target.to_kv());
        m.insert("frames", self.frames);
        m.insert("cars_per_frame", format!("{},{}", self.cars_per_frame.0, self.cars_per_frame.1));
        m.insert_list("placement", &self.placement);
        m.insert("overfit_alpha", self.overfit_alpha);
        m.insert("center_noise", self.center_noise);
        m.insert("yaw_noise", self.yaw_noise);
        m.insert("heading", self.heading.to_kv_value());
        m.insert("drop_rate", self.drop_rate);
        m.insert("spawn_rate", self.spawn_rate);
        m.insert("seed", self.seed);
        m.insert("class", &self.class_label);
        m
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, SimError> {
        const KEYS: [&str; 11] = [
            "frames",
            "cars_per_frame",
            "placement",
            "overfit_alpha",
            "center_noise",
            "yaw_noise",
            "heading",
            "drop_rate",
            "spawn_rate",
            "seed",
            "class",
        ];
        if let Some(k) = m
            .keys()
            .find(|k| !(KEYS.contains(k) || k.starts_with("source.") || k.starts_with("target.")))
        {
            return Err(KvError::Unknown(k.to_string()).into());
        }
        let cars: [f64; 2] = m.get_list("cars_per_frame")?;
        if cars.iter().any(|c| c.fract() != 0.0 || *c < 0.0) {
            return Err(SimError::InvalidConfig("cars_per_frame must be whole numbers".into()));
        }
        let heading_raw = m.get_str("heading")?;
        let cfg = Self {
            source: DatasetProfile::from_kv(&m.section("source"))?,
            target: DatasetProfile::from_kv(&m.section("target"))?,
            frames: m.get("frames")?,
            cars_per_frame: (cars[0] as usize, cars[1] as usize),
            placement: m.get_list("placement")?,
            overfit_alpha: m.get("overfit_alpha")?,
            center_noise: m.get("center_noise")?,
            yaw_noise: m.get("yaw_noise")?,
            heading: HeadingMode::from_kv_value(heading_raw).ok_or_else(|| {
                SimError::InvalidConfig(format!("heading `{heading_raw}` (expected uniform or road:<jitter>)"))
            })?,
            drop_rate: m.get("drop_rate")?,
            spawn_rate: m.get("spawn_rate")?,
            seed: m.get("seed")?,
            class_label: m.get_str("class")?.to_string(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

const STREAM_SCENE: u64 = 1;
const STREAM_DETECT: u64 = 2;
const STREAM_SPAWN: u64 = 3;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based generator for one (seed, frame, stream, item) cell.
fn cell_rng(seed: u64, frame: usize, stream: u64, item: usize) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for part in [frame as u64, stream, item as u64] {
        h = splitmix(h ^ part);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn gaussian(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    std * z
}

fn truncated_size(rng: &mut ChaCha8Rng, mean: f64, spread: f64) -> f64 {
    let z = loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= TRUNCATION_SPREADS {
            break z;
        }
    };
    (mean + spread * z).max(MIN_DIMENSION)
}

/// Uniform in (-π, π].
fn uniform_yaw(rng: &mut ChaCha8Rng) -> f64 {
    PI - 2.0 * PI * rng.random::<f64>()
}

/// Ground truth for one frame: cars with non-overlapping footprints, sizes
/// from the target profile, resting on z = 0.
pub fn sample_scene(cfg: &SimConfig, frame_index: usize) -> Vec<GroundTruthObject> {
    let mut rng = cell_rng(cfg.seed, frame_index, STREAM_SCENE, 0);
    let (lo, hi) = cfg.cars_per_frame;
    let n = rng.random_range(lo..=hi);
    let t = &cfg.target;
    let [x0, y0, x1, y1] = cfg.placement;

    let mut placed: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let width = truncated_size(&mut rng, t.mean(Dimension::Width), t.spread(Dimension::Width));
        let height = truncated_size(&mut rng, t.mean(Dimension::Height), t.spread(Dimension::Height));
        let length = truncated_size(&mut rng, t.mean(Dimension::Length), t.spread(Dimension::Length));
        let yaw = match cfg.heading {
            HeadingMode::Uniform => uniform_yaw(&mut rng),
            HeadingMode::RoadAligned { jitter } => {
                let base = if rng.random::<bool>() { 0.0 } else { PI };
                base + gaussian(&mut rng, jitter)
            }
        };
        let radius = 0.5 * length.hypot(width);
        let mut spot = None;
        for _ in 0..1000 {
            let x = rng.random_range(x0..=x1);
            let y = rng.random_range(y0..=y1);
            // bounding circles with 0.5 m clearance
            if placed
                .iter()
                .all(|&(px, py, pr)| (x - px).hypot(y - py) > radius + pr + 0.5)
            {
                spot = Some((x, y));
                break;
            }
        }
        let Some((x, y)) = spot else { continue };
        placed.push((x, y, radius));
        let bbox = Box3D::new([x, y, 0.5 * height], length, width, height, yaw)
            .expect("sampled sizes are positive");
        out.push(GroundTruthObject::new(bbox, cfg.class_label.clone()));
    }
    out
}

/// Relative size error plus center offset (in GT lengths) plus heading error
/// (in half turns); the detector's confidence is `max(0, 1 − this)`.
pub fn discrepancy(gt: &Box3D, pred: &Box3D) -> f64 {
    let size: f64 = [Dimension::Length, Dimension::Width, Dimension::Height]
        .iter()
        .map(|d| (pred.dimension(*d) - gt.dimension(*d)).abs() / gt.dimension(*d))
        .sum::<f64>()
        / 3.0;
    let center = (pred.cx() - gt.cx()).hypot(pred.cy() - gt.cy()) / gt.length();
    let heading = normalize_yaw(pred.yaw() - gt.yaw()).abs() / PI;
    size + center + heading
}

/// One prediction per ground-truth car (unless dropped), sizes blended toward
/// the source mean by `overfit_alpha`, plus optional spawned false positives.
pub fn biased_detector(gt: &[GroundTruthObject], cfg: &SimConfig, frame_index: usize) -> Vec<Prediction> {
    let a = cfg.overfit_alpha;
    let mut out = Vec::with_capacity(gt.len());
    for (i, g) in gt.iter().enumerate() {
        let mut rng = cell_rng(cfg.seed, frame_index, STREAM_DETECT, i);
        let dropped = rng.random::<f64>() < cfg.drop_rate;
        let dx = gaussian(&mut rng, cfg.center_noise);
        let dy = gaussian(&mut rng, cfg.center_noise);
        let dyaw = gaussian(&mut rng, cfg.yaw_noise);
        if dropped {
            continue;
        }
        let size = |d: Dimension| a * cfg.source.mean(d) + (1.0 - a) * g.bbox.dimension(d);
        let (l, w, h) = (size(Dimension::Length), size(Dimension::Width), size(Dimension::Height));
        let b = &g.bbox;
        let bbox = Box3D::new([b.cx() + dx, b.cy() + dy, 0.5 * h], l, w, h, b.yaw() + dyaw)
            .expect("blended sizes are positive");
        let score = (1.0 - discrepancy(b, &bbox)).max(0.0);
        out.push(Prediction::new(bbox, cfg.class_label.clone(), score));
    }
    if cfg.spawn_rate > 0.0 {
        let mut rng = cell_rng(cfg.seed, frame_index, STREAM_SPAWN, 0);
        let [x0, y0, x1, y1] = cfg.placement;
        for _ in 0..gt.len() {
            if rng.random::<f64>() >= cfg.spawn_rate {
                continue;
            }
            let s = &cfg.source;
            let bbox = Box3D::new(
                [rng.random_range(x0..=x1), rng.random_range(y0..=y1), 0.5 * s.mean_height],
                s.mean_length,
                s.mean_width,
                s.mean_height,
                uniform_yaw(&mut rng),
            )
            .expect("profile means are positive");
            out.push(Prediction::new(bbox, cfg.class_label.clone(), 0.5 * rng.random::<f64>()));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub report: ApReport,
    pub ground_truth: FrameSet<GroundTruthObject>,
    pub predictions: FrameSet<Prediction>,
    /// Target size statistics actually drawn.
    pub realized_target: DatasetProfile,
    /// Source means against the realized target statistics.
    pub realized_gap: SizeGap,
}

pub fn frame_id(index: usize) -> String {
    format!("{index:06}")
}

pub fn run_experiment(cfg: &SimConfig) -> Result<SimResult, SimError> {
    let eval = EvalConfig {
        target_class: cfg.class_label.clone(),
        ..EvalConfig::default()
    };
    run_experiment_with(cfg, &eval, Execution::default())
}

pub fn run_experiment_with(
    cfg: &SimConfig,
    eval: &EvalConfig,
    exec: Execution,
) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let frames = exec.map_indices(cfg.frames, |i| {
        let gt = sample_scene(cfg, i);
        let pred = biased_detector(&gt, cfg, i);
        (gt, pred)
    });
    let mut ground_truth = FrameSet::new();
    let mut predictions = FrameSet::new();
    for (i, (gt, pred)) in frames.into_iter().enumerate() {
        ground_truth.insert(frame_id(i), gt);
        predictions.insert(frame_id(i), pred);
    }
    let report = evaluate_with(&ground_truth, &predictions, eval, exec)?;
    let realized_target = size_statistics(&format!("{} (drawn)", cfg.target.name), &ground_truth, &cfg.class_label)?;
    let realized_gap = percentage_gap(&cfg.source, &realized_target);
    Ok(SimResult {
        report,
        ground_truth,
        predictions,
        realized_target,
        realized_gap,
    })
}
