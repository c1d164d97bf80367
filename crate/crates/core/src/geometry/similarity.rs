//! Overlap-based similarity metrics for association costs.

use super::polygon::{convex_hull, convex_polygon_intersection_area, polygon_area};
use super::{Box2D, Box3D};
use crate::scalar::Real;

/// Intersection-over-union of two axis-aligned boxes, in `[0, 1]`.
///
/// Zero when disjoint or when both boxes are degenerate.
pub fn iou_2d<S: Real>(a: &Box2D<S>, b: &Box2D<S>) -> S {
    let inter = match a.intersection(b) {
        Some(r) => r.area(),
        None => return S::zero(),
    };
    let union = a.area() + b.area() - inter;
    if union <= S::zero() {
        return S::zero();
    }
    inter / union
}

/// Generalized IoU of two axis-aligned boxes, in `[-1, 1]`.
pub fn giou_2d<S: Real>(a: &Box2D<S>, b: &Box2D<S>) -> S {
    let inter = a.intersection(b).map(|r| r.area()).unwrap_or(S::zero());
    let union = a.area() + b.area() - inter;
    let hull = Box2D {
        x1: a.x1.min(b.x1),
        y1: a.y1.min(b.y1),
        x2: a.x2.max(b.x2),
        y2: a.y2.max(b.y2),
    };
    let hull_area = hull.area();
    let iou = if union > S::zero() { inter / union } else { S::zero() };
    if hull_area <= S::zero() {
        return iou;
    }
    iou - (hull_area - union) / hull_area
}

/// Birds-eye-view IoU of two upright boxes (rotated-rectangle footprints).
pub fn bev_iou_3d<S: Real>(a: &Box3D<S>, b: &Box3D<S>) -> S {
    let fa = a.bev_corners();
    let fb = b.bev_corners();
    let inter = convex_polygon_intersection_area(&fa, &fb);
    let union = a.footprint_area() + b.footprint_area() - inter;
    if union <= S::zero() {
        return S::zero();
    }
    inter / union
}

/// Birds-eye-view generalized IoU with a convex-hull enclosing region.
///
/// The enclosure is the convex hull of both footprints rather than an exact
/// 3D volume, trading volumetric fidelity for a fast polygon computation.
pub fn bev_giou_3d<S: Real>(a: &Box3D<S>, b: &Box3D<S>) -> S {
    let fa = a.bev_corners();
    let fb = b.bev_corners();
    let inter = convex_polygon_intersection_area(&fa, &fb);
    let union = a.footprint_area() + b.footprint_area() - inter;
    let mut pts: Vec<[S; 2]> = Vec::with_capacity(8);
    pts.extend_from_slice(&fa);
    pts.extend_from_slice(&fb);
    let hull_area = polygon_area(&convex_hull(&pts)).abs();
    let iou = if union > S::zero() { inter / union } else { S::zero() };
    if hull_area <= S::zero() {
        return iou;
    }
    iou - (hull_area - union) / hull_area
}
