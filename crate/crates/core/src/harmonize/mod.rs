//! Dataset harmonization: common point-cloud range, vertical alignment of the
//! ground plane, car-only frame filtering, and per-dataset size statistics.

mod profile;

pub use profile::{
    builtin_profile, percentage_gap, size_statistics, DatasetProfile, SizeGap, BUILTIN_PROFILES,
    DEFAULT_RELATIVE_SPREAD,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::GeomError;
use crate::ingest::{Point, PointCloud};
use crate::kv::{KvError, KvMap};
use crate::metrics::{FrameSet, GroundTruthObject, Prediction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonizeError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

pub const DEFAULT_POINT_RANGE: [f64; 6] = [-75.2, -75.2, -2.0, 75.2, 75.2, 4.0];
pub const DEFAULT_VOXEL_SIZE: [f64; 3] = [0.1, 0.1, 0.15];

/// Closed box `[x_min, y_min, z_min, x_max, y_max, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRange(pub [f64; 6]);

impl Default for PointRange {
    fn default() -> Self {
        PointRange(DEFAULT_POINT_RANGE)
    }
}

impl PointRange {
    pub fn new(bounds: [f64; 6]) -> Result<Self, HarmonizeError> {
        let r = PointRange(bounds);
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), HarmonizeError> {
        let b = self.0;
        if b.iter().any(|v| !v.is_finite()) || (0..3).any(|i| b[i] >= b[i + 3]) {
            return Err(HarmonizeError::InvalidConfig(format!(
                "point range mins must be below maxes: {b:?}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64, z: f64) -> bool {
        let b = self.0;
        x >= b[0] && x <= b[3] && y >= b[1] && y <= b[4] && z >= b[2] && z <= b[5]
    }
}

/// Per-dataset vertical offsets that bring the ground to z = 0. These are
/// conventions for the usual sensor mounting heights, not measured values.
pub fn suggested_vertical_shift(dataset: &str) -> Option<f64> {
    match dataset {
        "kitti" => Some(1.6),
        "nuscenes" => Some(1.8),
        "waymo" => Some(0.0),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonizeConfig {
    pub point_range: PointRange,
    /// Added to every z so the X-Y plane lies on the ground.
    pub vertical_shift: f64,
    /// Carried for downstream voxel-based detectors; unused here.
    pub voxel_size: [f64; 3],
}

impl Default for HarmonizeConfig {
    fn default() -> Self {
        Self {
            point_range: PointRange::default(),
            vertical_shift: 0.0,
            voxel_size: DEFAULT_VOXEL_SIZE,
        }
    }
}

impl HarmonizeConfig {
    pub fn validate(&self) -> Result<(), HarmonizeError> {
        self.point_range.validate()?;
        if !self.vertical_shift.is_finite() {
            return Err(HarmonizeError::InvalidConfig("vertical_shift must be finite".into()));
        }
        if self.voxel_size.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(HarmonizeError::InvalidConfig(format!(
                "voxel sizes must be positive: {:?}",
                self.voxel_size
            )));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvMap {
        let mut m = KvMap::default();
        m.insert_list("point_range", &self.point_range.0);
        m.insert("vertical_shift", self.vertical_shift);
        m.insert_list("voxel_size", &self.voxel_size);
        m
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, HarmonizeError> {
        m.deny_unknown(&["point_range", "vertical_shift", "voxel_size"])?;
        let cfg = Self {
            point_range: PointRange(m.get_list::<6>("point_range")?),
            vertical_shift: m.get("vertical_shift")?,
            voxel_size: m.get_list::<3>("voxel_size")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Keeps points inside the closed range, in order. Idempotent.
pub fn clip_range(cloud: &PointCloud, range: &PointRange) -> PointCloud {
    PointCloud {
        points: cloud
            .points
            .iter()
            .filter(|p| range.contains(p.x as f64, p.y as f64, p.z as f64))
            .copied()
            .collect(),
    }
}

/// Shift then clip, the full per-cloud harmonization.
pub fn harmonize_cloud(cloud: &PointCloud, cfg: &HarmonizeConfig) -> PointCloud {
    let mut shifted = cloud.clone();
    shifted.shift_vertical(cfg.vertical_shift);
    clip_range(&shifted, &cfg.point_range)
}

/// Adds a constant to every vertical coordinate.
pub trait VerticalShift {
    fn shift_vertical(&mut self, dz: f64);
}

impl VerticalShift for PointCloud {
    fn shift_vertical(&mut self, dz: f64) {
        for p in &mut self.points {
            *p = Point {
                z: (p.z as f64 + dz) as f32,
                ..*p
            };
        }
    }
}

impl VerticalShift for crate::geom::Box3D {
    fn shift_vertical(&mut self, dz: f64) {
        *self = self
            .translated([0.0, 0.0, dz])
            .expect("finite shift keeps a valid box");
    }
}

impl VerticalShift for FrameSet<GroundTruthObject> {
    fn shift_vertical(&mut self, dz: f64) {
        for o in self.values_mut().flatten() {
            o.bbox.shift_vertical(dz);
        }
    }
}

impl VerticalShift for FrameSet<Prediction> {
    fn shift_vertical(&mut self, dz: f64) {
        for o in self.values_mut().flatten() {
            o.bbox.shift_vertical(dz);
        }
    }
}

/// Keeps the frames holding at least one ground-truth object of `class_label`.
pub fn filter_frames_without_class(
    frames: &FrameSet<GroundTruthObject>,
    class_label: &str,
) -> FrameSet<GroundTruthObject> {
    frames
        .iter()
        .filter(|(_, objs)| objs.iter().any(|o| o.class_label == class_label))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}
