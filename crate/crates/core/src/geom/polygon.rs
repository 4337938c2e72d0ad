use serde::{Deserialize, Serialize};

use super::{GeomError, Result, DEGENERATE_AREA};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Validates vertex count, orientation, convexity and area.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(GeomError::Degenerate(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(GeomError::Degenerate("non-finite vertex".into()));
        }
        let area = signed_area(&vertices);
        if area < DEGENERATE_AREA {
            return Err(GeomError::Degenerate(format!(
                "polygon signed area {area:e} is below {DEGENERATE_AREA:e} (clockwise or collapsed)"
            )));
        }
        let n = vertices.len();
        let scale = vertices
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(1.0, f64::max);
        let tol = 1e-12 * scale * scale;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(a, b, c) < -tol {
                return Err(GeomError::Degenerate(format!("polygon is not convex at vertex {}", (i + 1) % n)));
            }
        }
        Ok(Self { vertices })
    }

    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point2>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// True when `p` lies inside or on the boundary.
    pub fn contains(&self, p: Point2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= 0.0)
    }

    /// Area of the intersection with `other`, by clipping `self` against every
    /// edge of `other`.
    pub fn intersection_area(&self, other: &ConvexPolygon) -> f64 {
        let clipped = clip_convex(&self.vertices, &other.vertices);
        if clipped.len() < 3 {
            0.0
        } else {
            signed_area(&clipped).max(0.0)
        }
    }
}

/// z-component of (b - a) × (c - a); positive when c is left of a→b.
fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Shoelace formula.
pub(crate) fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let mut twice = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    0.5 * twice
}

/// Sutherland–Hodgman clip of `subject` by the convex CCW polygon `clip`.
fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut output = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let d_cur = cross(a, b, cur);
            let d_prev = cross(a, b, prev);
            let cur_in = d_cur >= 0.0;
            let prev_in = d_prev >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(edge_crossing(prev, cur, d_prev, d_cur));
                }
                output.push(cur);
            } else if prev_in {
                output.push(edge_crossing(prev, cur, d_prev, d_cur));
            }
        }
    }
    output
}

fn edge_crossing(p: Point2, q: Point2, dp: f64, dq: f64) -> Point2 {
    let t = dp / (dp - dq);
    Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}
