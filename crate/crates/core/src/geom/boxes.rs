use serde::{Deserialize, Serialize};

use super::polygon::{ConvexPolygon, Point2};
use super::{normalize_yaw, GeomError, Result};

/// Oriented 3D box with horizontal bottom face.
///
/// `length` runs along the box's local forward axis, `width` along its local
/// lateral axis. `yaw` is measured from canonical +X toward +Y and is kept in
/// (-π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    cx: f64,
    cy: f64,
    cz: f64,
    length: f64,
    width: f64,
    height: f64,
    yaw: f64,
}

impl Box3D {
    pub fn new(
        center: [f64; 3],
        length: f64,
        width: f64,
        height: f64,
        yaw: f64,
    ) -> Result<Self> {
        if center.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::InvalidBox(format!(
                "non-finite center {center:?}"
            )));
        }
        for (name, v) in [("length", length), ("width", width), ("height", height)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GeomError::InvalidBox(format!("{name} must be positive, got {v}")));
            }
        }
        if !yaw.is_finite() {
            return Err(GeomError::InvalidBox(format!("non-finite yaw {yaw}")));
        }
        Ok(Self {
            cx: center[0],
            cy: center[1],
            cz: center[2],
            length,
            width,
            height,
            yaw: normalize_yaw(yaw),
        })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn cz(&self) -> f64 {
        self.cz
    }
    pub fn center(&self) -> [f64; 3] {
        [self.cx, self.cy, self.cz]
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn height(&self) -> f64 {
        self.height
    }
    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn dimension(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Length => self.length,
            Dimension::Width => self.width,
            Dimension::Height => self.height,
        }
    }

    pub fn volume(&self) -> f64 {
        self.length * self.width * self.height
    }

    pub fn z_min(&self) -> f64 {
        self.cz - 0.5 * self.height
    }

    pub fn z_max(&self) -> f64 {
        self.cz + 0.5 * self.height
    }

    /// Same box moved by `delta`.
    pub fn translated(&self, delta: [f64; 3]) -> Result<Self> {
        Self::new(
            [self.cx + delta[0], self.cy + delta[1], self.cz + delta[2]],
            self.length,
            self.width,
            self.height,
            self.yaw,
        )
    }

    /// Same box rotated by `angle` about the vertical axis through the origin.
    pub fn rotated_about_origin(&self, angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        Self::new(
            [c * self.cx - s * self.cy, s * self.cx + c * self.cy, self.cz],
            self.length,
            self.width,
            self.height,
            self.yaw + angle,
        )
    }

    /// Axis-aligned spans of the footprint along canonical X and Y.
    pub fn projected_extents(&self) -> (f64, f64) {
        projected_extents_unchecked(0.5 * self.length, 0.5 * self.width, self.yaw)
    }

    /// Silhouette in the X-Z plane (u = X, v = Z).
    pub fn side_view_rect(&self) -> AlignedRect {
        let (ex, _) = self.projected_extents();
        AlignedRect {
            min_u: self.cx - 0.5 * ex,
            max_u: self.cx + 0.5 * ex,
            min_v: self.z_min(),
            max_v: self.z_max(),
        }
    }

    /// Silhouette in the Y-Z plane (u = Y, v = Z).
    pub fn front_view_rect(&self) -> AlignedRect {
        let (_, ey) = self.projected_extents();
        AlignedRect {
            min_u: self.cy - 0.5 * ey,
            max_u: self.cy + 0.5 * ey,
            min_v: self.z_min(),
            max_v: self.z_max(),
        }
    }

    /// Footprint rectangle in the X-Y plane, counter-clockwise starting at
    /// the front-right corner.
    pub fn bev_footprint(&self) -> ConvexPolygon {
        let (s, c) = self.yaw.sin_cos();
        let hl = 0.5 * self.length;
        let hw = 0.5 * self.width;
        let corners = [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)];
        let vertices = corners
            .iter()
            .map(|&(u, v)| Point2::new(self.cx + c * u - s * v, self.cy + s * u + c * v))
            .collect();
        ConvexPolygon::from_ccw_unchecked(vertices)
    }
}

/// Axis selector for single-dimension overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Length,
    Width,
    Height,
}

/// Axis-aligned spans `(extent_x, extent_y)` of a rectangle with the given
/// half extents rotated by `yaw`.
///
/// For yaw in [0, π/2] this is exactly `2(w sinθ + l cosθ)`, `2(w cosθ + l sinθ)`;
/// absolute values extend it to every other quadrant.
pub fn projected_extents(half_length: f64, half_width: f64, yaw: f64) -> Result<(f64, f64)> {
    for (name, v) in [("half_length", half_length), ("half_width", half_width)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(GeomError::InvalidBox(format!("{name} must be positive, got {v}")));
        }
    }
    if !yaw.is_finite() {
        return Err(GeomError::InvalidBox(format!("non-finite yaw {yaw}")));
    }
    Ok(projected_extents_unchecked(half_length, half_width, yaw))
}

fn projected_extents_unchecked(half_length: f64, half_width: f64, yaw: f64) -> (f64, f64) {
    let (s, c) = yaw.sin_cos();
    let (s, c) = (s.abs(), c.abs());
    (
        2.0 * (half_width * s + half_length * c),
        2.0 * (half_width * c + half_length * s),
    )
}

/// Axis-aligned rectangle in a named plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedRect {
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
}

impl AlignedRect {
    pub fn new(min_u: f64, max_u: f64, min_v: f64, max_v: f64) -> Result<Self> {
        let all = [min_u, max_u, min_v, max_v];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidRect(format!("non-finite bounds {all:?}")));
        }
        if min_u > max_u || min_v > max_v {
            return Err(GeomError::InvalidRect(format!("inverted bounds {all:?}")));
        }
        Ok(Self {
            min_u,
            max_u,
            min_v,
            max_v,
        })
    }

    pub fn width_u(&self) -> f64 {
        self.max_u - self.min_u
    }

    pub fn height_v(&self) -> f64 {
        self.max_v - self.min_v
    }

    pub fn area(&self) -> f64 {
        self.width_u() * self.height_v()
    }
}
