#![allow(dead_code)]

use crossdet::geom::Box3D;
use crossdet::metrics::{FrameSet, GroundTruthObject, Prediction};
use rand::rngs::SmallRng;
use rand::Rng;

pub fn car(x: f64, y: f64, z_shift: f64) -> Box3D {
    Box3D::new([x, y, 0.75 + z_shift], 4.0, 1.8, 1.5, 0.0).unwrap()
}

/// Three frames, two cars each, all within 30 m. Every prediction is exact
/// except the top-scored one, which floats 0.3 m above its car.
pub fn three_frame_fixture() -> (FrameSet<GroundTruthObject>, FrameSet<Prediction>) {
    let layout = [
        ("f0", [(10.0, 0.0, 0.3, 0.95), (15.0, 8.0, 0.0, 0.9)]),
        ("f1", [(5.0, -6.0, 0.0, 0.85), (20.0, 3.0, 0.0, 0.8)]),
        ("f2", [(-12.0, 4.0, 0.0, 0.75), (8.0, 22.0, 0.0, 0.7)]),
    ];
    let mut gt = FrameSet::new();
    let mut pred = FrameSet::new();
    for (id, cars) in layout {
        gt.insert(
            id.to_string(),
            cars.iter().map(|&(x, y, _, _)| GroundTruthObject::new(car(x, y, 0.0), "Car")).collect(),
        );
        pred.insert(
            id.to_string(),
            cars.iter().map(|&(x, y, dz, s)| Prediction::new(car(x, y, dz), "Car", s)).collect(),
        );
    }
    (gt, pred)
}

/// AP straight from its definition: at every recall level take the best
/// precision over all score-sorted prefixes reaching it.
pub fn definition_ap(sorted_hits: &[bool], gt_count: usize, levels: &[f64]) -> f64 {
    let mut prefix = Vec::new();
    let mut tp = 0usize;
    for (i, hit) in sorted_hits.iter().enumerate() {
        if *hit {
            tp += 1;
        }
        prefix.push((tp as f64 / (i + 1) as f64, tp as f64 / gt_count as f64));
    }
    let total: f64 = levels
        .iter()
        .map(|&r| {
            prefix
                .iter()
                .filter(|(_, rec)| *rec >= r)
                .map(|(p, _)| *p)
                .fold(0.0, f64::max)
        })
        .sum();
    100.0 * total / levels.len() as f64
}

pub fn r40() -> Vec<f64> {
    (1..=40).map(|k| k as f64 / 40.0).collect()
}

/// Point-in-box test in the box's own frame.
fn inside(b: &Box3D, p: [f64; 3], use_z: bool) -> bool {
    let (s, c) = b.yaw().sin_cos();
    let dx = p[0] - b.cx();
    let dy = p[1] - b.cy();
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    u.abs() <= 0.5 * b.length()
        && v.abs() <= 0.5 * b.width()
        && (!use_z || (p[2] - b.cz()).abs() <= 0.5 * b.height())
}

/// Axis-aligned bounds of a box: `[x0, y0, z0, x1, y1, z1]`.
fn aabb(b: &Box3D) -> [f64; 6] {
    let (ex, ey) = b.projected_extents();
    [
        b.cx() - ex / 2.0,
        b.cy() - ey / 2.0,
        b.z_min(),
        b.cx() + ex / 2.0,
        b.cy() + ey / 2.0,
        b.z_max(),
    ]
}

pub struct McEstimate {
    pub bev: f64,
    pub bev_union_hits: u64,
    pub iou_3d: f64,
    pub union_3d_hits: u64,
}

/// Uniform samples over the joint bounding box; IoU as the ratio of
/// both-inside hits to either-inside hits. The xy coordinates of the same
/// samples give the BEV estimate.
pub fn monte_carlo_iou(a: &Box3D, b: &Box3D, samples: u64, rng: &mut SmallRng) -> McEstimate {
    let (ba, bb) = (aabb(a), aabb(b));
    let lo = [ba[0].min(bb[0]), ba[1].min(bb[1]), ba[2].min(bb[2])];
    let hi = [ba[3].max(bb[3]), ba[4].max(bb[4]), ba[5].max(bb[5])];
    let (mut bev_both, mut bev_any, mut both, mut any) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..samples {
        let p = [
            rng.random_range(lo[0]..hi[0]),
            rng.random_range(lo[1]..hi[1]),
            rng.random_range(lo[2]..hi[2]),
        ];
        let (ia, ib) = (inside(a, p, false), inside(b, p, false));
        if ia || ib {
            bev_any += 1;
            if ia && ib {
                bev_both += 1;
            }
            let za = ia && (p[2] - a.cz()).abs() <= 0.5 * a.height();
            let zb = ib && (p[2] - b.cz()).abs() <= 0.5 * b.height();
            if za || zb {
                any += 1;
                if za && zb {
                    both += 1;
                }
            }
        }
    }
    let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    McEstimate {
        bev: ratio(bev_both, bev_any),
        bev_union_hits: bev_any,
        iou_3d: ratio(both, any),
        union_3d_hits: any,
    }
}

/// Agreement within `k` binomial standard errors, computed at the exact value.
pub fn within_se(exact: f64, estimate: f64, n: u64, k: f64) -> bool {
    if exact <= 0.0 || exact >= 1.0 {
        return estimate == exact;
    }
    let se = (exact * (1.0 - exact) / n as f64).sqrt();
    (estimate - exact).abs() <= k * se
}

pub fn random_box(rng: &mut SmallRng, spread: f64) -> Box3D {
    Box3D::new(
        [
            rng.random_range(-spread..spread),
            rng.random_range(-spread..spread),
            rng.random_range(-0.5..0.5),
        ],
        rng.random_range(1.0..6.0),
        rng.random_range(0.5..3.0),
        rng.random_range(0.5..3.0),
        rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
    .unwrap()
}
