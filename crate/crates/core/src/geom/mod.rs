//! Geometry kernels for ground-seated oriented 3D boxes.
//!
//! Canonical frame: X forward, Y left, Z up. A [`Box3D`] is centered at its
//! geometric center and rotated about the vertical axis only, so its bottom
//! face is always horizontal. That single fact lets every IoU here factor
//! into a planar part and an interval part.

mod boxes;
mod iou;
mod polygon;

pub use boxes::{projected_extents, AlignedRect, Box3D, Dimension};
pub use iou::{interval_iou, iou_1d_dimension, iou_3d, iou_aligned, iou_rotated};
pub use polygon::{ConvexPolygon, Point2};

use thiserror::Error;

/// Polygons with area below this are rejected as degenerate (m²).
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

/// Wraps an angle into (-π, π].
pub fn normalize_yaw(yaw: f64) -> f64 {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let mut y = yaw.rem_euclid(two_pi);
    if y > PI {
        y -= two_pi;
    }
    // rem_euclid can return exactly 2π for tiny negative inputs
    if y <= -PI {
        y += two_pi;
    }
    y
}
