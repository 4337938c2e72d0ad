mod common;

use std::f64::consts::PI;

use crossdet::geom::{iou_1d_dimension, iou_3d, iou_aligned, iou_rotated, Box3D, Dimension};
use proptest::prelude::*;
use rand::rngs::SmallRng;
use rand::SeedableRng;

fn arb_box() -> impl Strategy<Value = Box3D> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        -0.5..0.5f64,
        0.5..6.0f64,
        0.3..3.0f64,
        0.3..3.0f64,
        -PI..PI,
    )
        .prop_map(|(x, y, z, l, w, h, yaw)| Box3D::new([x, y, z], l, w, h, yaw).unwrap())
}

fn all_ious(a: &Box3D, b: &Box3D) -> Vec<f64> {
    let mut v = vec![
        iou_rotated(&a.bev_footprint(), &b.bev_footprint()).unwrap(),
        iou_3d(a, b).unwrap(),
        iou_aligned(&a.side_view_rect(), &b.side_view_rect()).unwrap(),
        iou_aligned(&a.front_view_rect(), &b.front_view_rect()).unwrap(),
    ];
    for d in [Dimension::Length, Dimension::Width, Dimension::Height] {
        v.push(iou_1d_dimension(a, b, d));
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn ious_are_bounded(a in arb_box(), b in arb_box()) {
        for v in all_ious(&a, &b) {
            prop_assert!((0.0..=1.0).contains(&v), "{v}");
        }
    }

    #[test]
    fn box_ious_are_symmetric(a in arb_box(), b in arb_box()) {
        // the dimension IoUs use the ground truth frame and are not symmetric
        let ab = all_ious(&a, &b);
        let ba = all_ious(&b, &a);
        for i in 0..4 {
            prop_assert_eq!(ab[i], ba[i]);
        }
        prop_assert_eq!(ab[6], ba[6]);
    }

    #[test]
    fn self_iou_is_one(a in arb_box()) {
        for v in all_ious(&a, &a) {
            prop_assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn rigid_motion_invariance(
        a in arb_box(),
        b in arb_box(),
        dx in -50.0..50.0f64,
        dy in -50.0..50.0f64,
        dz in -2.0..2.0f64,
        turn in -PI..PI,
    ) {
        let move_ = |x: &Box3D| x.rotated_about_origin(turn).unwrap().translated([dx, dy, dz]).unwrap();
        let (ma, mb) = (move_(&a), move_(&b));
        let before = [
            iou_rotated(&a.bev_footprint(), &b.bev_footprint()).unwrap(),
            iou_3d(&a, &b).unwrap(),
            iou_1d_dimension(&a, &b, Dimension::Length),
            iou_1d_dimension(&a, &b, Dimension::Width),
            iou_1d_dimension(&a, &b, Dimension::Height),
        ];
        let after = [
            iou_rotated(&ma.bev_footprint(), &mb.bev_footprint()).unwrap(),
            iou_3d(&ma, &mb).unwrap(),
            iou_1d_dimension(&ma, &mb, Dimension::Length),
            iou_1d_dimension(&ma, &mb, Dimension::Width),
            iou_1d_dimension(&ma, &mb, Dimension::Height),
        ];
        for (x, y) in before.iter().zip(after) {
            prop_assert!((x - y).abs() <= 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn nested_boxes_give_volume_ratio(a in arb_box(), shrink in 0.2..1.0f64) {
        let inner = Box3D::new(a.center(), a.length() * shrink, a.width() * shrink, a.height() * shrink, a.yaw()).unwrap();
        let want = inner.volume() / a.volume();
        prop_assert!((iou_3d(&a, &inner).unwrap() - want).abs() < 1e-9);
        let bev = iou_rotated(&a.bev_footprint(), &inner.bev_footprint()).unwrap();
        prop_assert!((bev - shrink * shrink).abs() < 1e-9);
    }

    #[test]
    fn three_d_never_exceeds_bev_for_equal_heights(a in arb_box(), b in arb_box()) {
        let b = Box3D::new([b.cx(), b.cy(), a.cz()], b.length(), b.width(), a.height(), b.yaw()).unwrap();
        let bev = iou_rotated(&a.bev_footprint(), &b.bev_footprint()).unwrap();
        prop_assert!((iou_3d(&a, &b).unwrap() - bev).abs() < 1e-12);
    }

    #[test]
    fn extents_have_period_pi(a in arb_box()) {
        let flipped = Box3D::new(a.center(), a.length(), a.width(), a.height(), a.yaw() + PI).unwrap();
        let (x0, y0) = a.projected_extents();
        let (x1, y1) = flipped.projected_extents();
        prop_assert!((x0 - x1).abs() < 1e-12 && (y0 - y1).abs() < 1e-12);
        prop_assert!(x0 > 0.0 && y0 > 0.0);
    }
}

#[test]
fn monte_carlo_spot_check() {
    let mut rng = SmallRng::seed_from_u64(7);
    for _ in 0..20 {
        let a = common::random_box(&mut rng, 1.5);
        let b = common::random_box(&mut rng, 1.5);
        let mc = common::monte_carlo_iou(&a, &b, 200_000, &mut rng);
        let bev = iou_rotated(&a.bev_footprint(), &b.bev_footprint()).unwrap();
        let full = iou_3d(&a, &b).unwrap();
        // 5 SE keeps this spot check free of chance failures
        assert!(common::within_se(bev, mc.bev, mc.bev_union_hits, 5.0), "{bev} vs {}", mc.bev);
        assert!(common::within_se(full, mc.iou_3d, mc.union_3d_hits, 5.0), "{full} vs {}", mc.iou_3d);
    }
}

#[test]
fn touching_boxes_have_zero_iou() {
    let a = Box3D::new([0.0, 0.0, 0.5], 2.0, 2.0, 1.0, 0.0).unwrap();
    let b = Box3D::new([2.0, 0.0, 0.5], 2.0, 2.0, 1.0, 0.0).unwrap();
    assert_eq!(iou_3d(&a, &b).unwrap(), 0.0);
    assert_eq!(iou_rotated(&a.bev_footprint(), &b.bev_footprint()).unwrap(), 0.0);
}
