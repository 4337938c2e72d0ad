use std::cmp::Ordering;

use super::boxes::{AlignedRect, Box3D, Dimension};
use super::polygon::ConvexPolygon;
use super::{GeomError, Result, DEGENERATE_AREA};

/// Overlap of two closed intervals over their union. Touching intervals give 0.
pub fn interval_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

pub fn iou_aligned(a: &AlignedRect, b: &AlignedRect) -> Result<f64> {
    let (area_a, area_b) = (a.area(), b.area());
    if area_a < DEGENERATE_AREA || area_b < DEGENERATE_AREA {
        return Err(GeomError::Degenerate(format!(
            "rectangle area below {DEGENERATE_AREA:e}: {area_a:e}, {area_b:e}"
        )));
    }
    let inter = overlap((a.min_u, a.max_u), (b.min_u, b.max_u))
        * overlap((a.min_v, a.max_v), (b.min_v, b.max_v));
    Ok((inter / (area_a + area_b - inter)).clamp(0.0, 1.0))
}

// Clipping order is fixed by vertex data so that f(a, b) and f(b, a) run the
// identical float sequence.
fn ordered<'a>(a: &'a ConvexPolygon, b: &'a ConvexPolygon) -> (&'a ConvexPolygon, &'a ConvexPolygon) {
    let key = |p: &ConvexPolygon| -> Vec<f64> {
        p.vertices().iter().flat_map(|v| [v.x, v.y]).collect()
    };
    let (ka, kb) = (key(a), key(b));
    let ord = ka
        .iter()
        .zip(&kb)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or_else(|| ka.len().cmp(&kb.len()));
    if ord == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

fn checked_area(p: &ConvexPolygon) -> Result<f64> {
    let area = p.area();
    if area.is_nan() || area < DEGENERATE_AREA {
        return Err(GeomError::Degenerate(format!(
            "polygon area {area:e} below {DEGENERATE_AREA:e}"
        )));
    }
    Ok(area)
}

fn bev_intersection(a: &ConvexPolygon, b: &ConvexPolygon) -> Result<(f64, f64, f64)> {
    let area_a = checked_area(a)?;
    let area_b = checked_area(b)?;
    let (first, second) = ordered(a, b);
    let inter = first
        .intersection_area(second)
        .clamp(0.0, area_a.min(area_b));
    Ok((inter, area_a, area_b))
}

/// IoU of two convex CCW polygons.
pub fn iou_rotated(a: &ConvexPolygon, b: &ConvexPolygon) -> Result<f64> {
    let (inter, area_a, area_b) = bev_intersection(a, b)?;
    Ok((inter / (area_a + area_b - inter)).clamp(0.0, 1.0))
}

/// Volumetric IoU of two boxes with horizontal bottom faces.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> Result<f64> {
    let (bev_inter, area_a, area_b) = bev_intersection(&a.bev_footprint(), &b.bev_footprint())?;
    let dz = overlap((a.z_min(), a.z_max()), (b.z_min(), b.z_max()));
    let inter = bev_inter * dz;
    let vol_a = area_a * a.height();
    let vol_b = area_b * b.height();
    Ok((inter / (vol_a + vol_b - inter)).clamp(0.0, 1.0))
}

/// Single-dimension overlap in the ground-truth box's local frame.
///
/// Each box contributes its own stated dimension centered at its center's
/// coordinate along the chosen GT axis; height uses the vertical spans.
pub fn iou_1d_dimension(gt: &Box3D, pred: &Box3D, axis: Dimension) -> f64 {
    let (gt_pos, pred_pos) = match axis {
        Dimension::Height => (gt.cz(), pred.cz()),
        Dimension::Length | Dimension::Width => {
            let dx = pred.cx() - gt.cx();
            let dy = pred.cy() - gt.cy();
            let (s, c) = gt.yaw().sin_cos();
            let along = if axis == Dimension::Length {
                c * dx + s * dy
            } else {
                -s * dx + c * dy
            };
            (0.0, along)
        }
    };
    let gd = gt.dimension(axis);
    let pd = pred.dimension(axis);
    interval_iou(
        (gt_pos - 0.5 * gd, gt_pos + 0.5 * gd),
        (pred_pos - 0.5 * pd, pred_pos + 0.5 * pd),
    )
}
