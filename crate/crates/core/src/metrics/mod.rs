//! Detection matching, precision/recall and AP over seven metric kinds and
//! three depth-based difficulty buckets.

mod matching;
mod pr;
mod report;

pub use matching::{match_frame, metric_iou, FrameMatch, Verdict};
pub use pr::{average_precision, pr_curve, PrCurve, PrPoint, ScoredVerdict};
pub use report::{evaluate, evaluate_with, ApCell, ApReport};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Box3D, Dimension, GeomError};

/// Objects of one kind grouped by frame id. Iteration order (sorted ids) is
/// the deterministic frame order used everywhere.
pub type FrameSet<T> = BTreeMap<String, Vec<T>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("prediction frames missing from ground truth: {}", .0.join(", "))]
    UnknownFrames(Vec<String>),
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    Input(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub bbox: Box3D,
    pub class_label: String,
}

impl GroundTruthObject {
    pub fn new(bbox: Box3D, class_label: impl Into<String>) -> Self {
        Self {
            bbox,
            class_label: class_label.into(),
        }
    }

    /// Horizontal distance from the sensor origin.
    pub fn depth(&self) -> f64 {
        self.bbox.cx().hypot(self.bbox.cy())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub bbox: Box3D,
    pub class_label: String,
    pub score: f64,
}

impl Prediction {
    pub fn new(bbox: Box3D, class_label: impl Into<String>, score: f64) -> Self {
        Self {
            bbox,
            class_label: class_label.into(),
            score,
        }
    }

    /// Horizontal distance from the sensor origin.
    pub fn depth(&self) -> f64 {
        self.bbox.cx().hypot(self.bbox.cy())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "bev")]
    Bev,
    #[serde(rename = "side")]
    Side,
    #[serde(rename = "front")]
    Front,
    #[serde(rename = "length")]
    Length,
    #[serde(rename = "width")]
    Width,
    #[serde(rename = "height")]
    Height,
}

impl MetricKind {
    pub const ALL: [MetricKind; 7] = [
        MetricKind::ThreeD,
        MetricKind::Bev,
        MetricKind::Side,
        MetricKind::Front,
        MetricKind::Length,
        MetricKind::Width,
        MetricKind::Height,
    ];

    pub const DIMENSIONS: [MetricKind; 3] =
        [MetricKind::Length, MetricKind::Width, MetricKind::Height];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::ThreeD => "3d",
            MetricKind::Bev => "bev",
            MetricKind::Side => "side",
            MetricKind::Front => "front",
            MetricKind::Length => "length",
            MetricKind::Width => "width",
            MetricKind::Height => "height",
        }
    }

    /// Row label used in text tables.
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::ThreeD => "3D",
            MetricKind::Bev => "BEV",
            MetricKind::Side => "Side-view",
            MetricKind::Front => "Front-view",
            MetricKind::Length => "Length",
            MetricKind::Width => "Width",
            MetricKind::Height => "Height",
        }
    }

    pub fn dimension(self) -> Option<Dimension> {
        match self {
            MetricKind::Length => Some(Dimension::Length),
            MetricKind::Width => Some(Dimension::Width),
            MetricKind::Height => Some(Dimension::Height),
            _ => None,
        }
    }

    pub fn is_dimension(self) -> bool {
        self.dimension().is_some()
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown metric kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Moderate,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Moderate => "moderate",
            Difficulty::Hard => "hard",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Difficulty::Easy => "Easy",
            Difficulty::Moderate => "Moderate",
            Difficulty::Hard => "Hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Difficulty::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown difficulty `{s}`"))
    }
}

/// Number of interpolation recall levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecallPoints {
    /// 0, 0.1, ..., 1.0
    R11,
    /// 1/40, 2/40, ..., 1
    R40,
}

impl RecallPoints {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            11 => Some(RecallPoints::R11),
            40 => Some(RecallPoints::R40),
            _ => None,
        }
    }

    pub fn count(self) -> u32 {
        match self {
            RecallPoints::R11 => 11,
            RecallPoints::R40 => 40,
        }
    }

    /// The recall levels, each computed as an exact quotient so that equality
    /// with `tp / gt_count` is not disturbed by accumulated rounding.
    pub fn levels(self) -> Vec<f64> {
        match self {
            RecallPoints::R11 => (0..=10).map(|i| i as f64 / 10.0).collect(),
            RecallPoints::R40 => (1..=40).map(|i| i as f64 / 40.0).collect(),
        }
    }
}

pub const DEFAULT_BOX_IOU: f64 = 0.7;
pub const DEFAULT_DIM_IOU: f64 = 0.85;
pub const DEFAULT_DIFFICULTY_DEPTHS: [f64; 3] = [30.0, 70.0, 70.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Threshold for 3D, BEV, side-view and front-view matching.
    pub box_iou_threshold: f64,
    /// Threshold for the single-dimension metrics.
    pub dim_iou_threshold: f64,
    /// Max horizontal depth (m) for Easy, Moderate, Hard; stored verbatim.
    pub difficulty_depths: [f64; 3],
    pub recall_points: RecallPoints,
    pub target_class: String,
    /// Metric kinds to evaluate, in report order.
    pub metrics: Vec<MetricKind>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            box_iou_threshold: DEFAULT_BOX_IOU,
            dim_iou_threshold: DEFAULT_DIM_IOU,
            difficulty_depths: DEFAULT_DIFFICULTY_DEPTHS,
            recall_points: RecallPoints::R40,
            target_class: "Car".to_string(),
            metrics: MetricKind::ALL.to_vec(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        for (name, t) in [
            ("box_iou_threshold", self.box_iou_threshold),
            ("dim_iou_threshold", self.dim_iou_threshold),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(EvalError::InvalidConfig(format!("{name} must be in (0, 1], got {t}")));
            }
        }
        if self.difficulty_depths.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(EvalError::InvalidConfig(format!(
                "difficulty depths must be positive, got {:?}",
                self.difficulty_depths
            )));
        }
        if self.target_class.is_empty() {
            return Err(EvalError::InvalidConfig("target class is empty".into()));
        }
        if self.metrics.is_empty() {
            return Err(EvalError::InvalidConfig("no metric kinds selected".into()));
        }
        Ok(())
    }

    pub fn threshold(&self, kind: MetricKind) -> f64 {
        if kind.is_dimension() {
            self.dim_iou_threshold
        } else {
            self.box_iou_threshold
        }
    }

    pub fn in_bucket(&self, gt: &GroundTruthObject, difficulty: Difficulty) -> bool {
        self.depth_in_bucket(gt.depth(), difficulty)
    }

    pub fn depth_in_bucket(&self, depth: f64, difficulty: Difficulty) -> bool {
        depth <= self.difficulty_depths[difficulty.index()]
    }
}

/// Buckets an object belongs to; membership is cumulative by depth cutoff.
pub fn assign_difficulty(gt: &GroundTruthObject, cfg: &EvalConfig) -> Vec<Difficulty> {
    Difficulty::ALL
        .into_iter()
        .filter(|d| cfg.in_bucket(gt, *d))
        .collect()
}
