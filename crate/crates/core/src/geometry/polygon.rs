//! Convex polygon primitives for birds-eye-view overlap computation.

use crate::scalar::Real;

/// Signed area via the shoelace formula; positive for counter-clockwise.
pub fn polygon_area<S: Real>(poly: &[[S; 2]]) -> S {
    if poly.len() < 3 {
        return S::zero();
    }
    let mut acc = S::zero();
    for i in 0..poly.len() {
        let [x1, y1] = poly[i];
        let [x2, y2] = poly[(i + 1) % poly.len()];
        acc += x1 * y2 - x2 * y1;
    }
    acc * crate::scalar::real::<S>(0.5)
}

fn cross<S: Real>(o: &[S; 2], a: &[S; 2], b: &[S; 2]) -> S {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Intersection area of two convex polygons (vertices in CCW order).
///
/// Sutherland-Hodgman clipping of `a` against each edge of `b`.
pub fn convex_polygon_intersection_area<S: Real>(a: &[[S; 2]], b: &[[S; 2]]) -> S {
    if a.len() < 3 || b.len() < 3 {
        return S::zero();
    }
    let mut subject: Vec<[S; 2]> = a.to_vec();
    for i in 0..b.len() {
        if subject.is_empty() {
            return S::zero();
        }
        let edge_start = b[i];
        let edge_end = b[(i + 1) % b.len()];
        let mut clipped: Vec<[S; 2]> = Vec::with_capacity(subject.len() + 1);
        for j in 0..subject.len() {
            let cur = subject[j];
            let next = subject[(j + 1) % subject.len()];
            let cur_inside = cross(&edge_start, &edge_end, &cur) >= S::zero();
            let next_inside = cross(&edge_start, &edge_end, &next) >= S::zero();
            if cur_inside {
                clipped.push(cur);
            }
            if cur_inside != next_inside {
                // Edge crossing: intersect segment (cur, next) with the clip line.
                let dc = cross(&edge_start, &edge_end, &cur);
                let dn = cross(&edge_start, &edge_end, &next);
                let t = dc / (dc - dn);
                clipped.push([
                    cur[0] + t * (next[0] - cur[0]),
                    cur[1] + t * (next[1] - cur[1]),
                ]);
            }
        }
        subject = clipped;
    }
    polygon_area(&subject).abs()
}

/// Convex hull (Andrew's monotone chain), returned counter-clockwise.
pub fn convex_hull<S: Real>(points: &[[S; 2]]) -> Vec<[S; 2]> {
    let mut pts: Vec<[S; 2]> = points.to_vec();
    pts.sort_by(|p, q| {
        p[0].partial_cmp(&q[0])
            .unwrap()
            .then(p[1].partial_cmp(&q[1]).unwrap())
    });
    pts.dedup_by(|p, q| p[0] == q[0] && p[1] == q[1]);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut hull: Vec<[S; 2]> = Vec::with_capacity(2 * n);
    for p in pts.iter() {
        while hull.len() >= 2
            && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= S::zero()
        {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= S::zero()
        {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}
