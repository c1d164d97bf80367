//! Box representations, multi-camera projection and similarity metrics.
//!
//! Coordinate conventions: the global frame is right-handed with z up.
//! A [`Box3D`] is an upright cuboid; its length extends along the heading
//! direction, its width across it. [`CameraModel`] holds the global-to-camera
//! rigid transform (`p_cam = R * p_global + t`) plus pinhole intrinsics.

mod polygon;
mod similarity;

pub use polygon::{convex_hull, convex_polygon_intersection_area, polygon_area};
pub use similarity::{bev_giou_3d, bev_iou_3d, giou_2d, iou_2d};

use serde::{Deserialize, Serialize};

use crate::linalg::{Mat3, Vec3};
use crate::scalar::{normalize_angle, real, Real};

/// Camera identifier as referenced by 2D detections.
pub type CameraId = String;

/// Upright 3D bounding box in the global frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D<S = f64> {
    /// Geometric center.
    pub x: S,
    pub y: S,
    pub z: S,
    /// Width (across heading), length (along heading), height. All positive.
    pub w: S,
    pub l: S,
    pub h: S,
    /// Yaw about the vertical axis, normalized to `(-pi, pi]`.
    pub heading: S,
}

impl<S: Real> Box3D<S> {
    pub fn new(x: S, y: S, z: S, w: S, l: S, h: S, heading: S) -> Self {
        debug_assert!(w > S::zero() && l > S::zero() && h > S::zero());
        Box3D {
            x,
            y,
            z,
            w,
            l,
            h,
            heading: normalize_angle(heading),
        }
    }

    pub fn center(&self) -> Vec3<S> {
        Vec3::new(self.x, self.y, self.z)
    }

    /// Footprint corners in the ground plane, counter-clockwise.
    pub fn bev_corners(&self) -> [[S; 2]; 4] {
        let (s, c) = self.heading.sin_cos();
        let hl = self.l * real::<S>(0.5);
        let hw = self.w * real::<S>(0.5);
        // Length axis u = (c, s); width axis v = (-s, c).
        let signs = [(S::one(), S::one()), (-S::one(), S::one()), (-S::one(), -S::one()), (S::one(), -S::one())];
        signs.map(|(a, b)| {
            [
                self.x + a * hl * c - b * hw * s,
                self.y + a * hl * s + b * hw * c,
            ]
        })
    }

    /// The 8 cuboid corners (bottom face first, then top).
    pub fn corners(&self) -> [Vec3<S>; 8] {
        let bev = self.bev_corners();
        let hh = self.h * real::<S>(0.5);
        let mut out = [Vec3::new(S::zero(), S::zero(), S::zero()); 8];
        for (i, c) in bev.iter().enumerate() {
            out[i] = Vec3::new(c[0], c[1], self.z - hh);
            out[i + 4] = Vec3::new(c[0], c[1], self.z + hh);
        }
        out
    }

    /// BEV footprint area.
    pub fn footprint_area(&self) -> S {
        self.w * self.l
    }
}

/// Axis-aligned 2D bounding box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2D<S = f64> {
    pub x1: S,
    pub y1: S,
    pub x2: S,
    pub y2: S,
}

impl<S: Real> Box2D<S> {
    pub fn new(x1: S, y1: S, x2: S, y2: S) -> Self {
        debug_assert!(x2 >= x1 && y2 >= y1);
        Box2D { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> S {
        self.x2 - self.x1
    }

    pub fn height(&self) -> S {
        self.y2 - self.y1
    }

    pub fn area(&self) -> S {
        self.width() * self.height()
    }

    pub fn center(&self) -> [S; 2] {
        let half = real::<S>(0.5);
        [(self.x1 + self.x2) * half, (self.y1 + self.y2) * half]
    }

    /// Intersection with another box, if non-degenerate overlap exists.
    pub fn intersection(&self, other: &Box2D<S>) -> Option<Box2D<S>> {
        let x1 = self.x1.max(other.x1);
        let y1 = self.y1.max(other.y1);
        let x2 = self.x2.min(other.x2);
        let y2 = self.y2.min(other.y2);
        if x2 > x1 && y2 > y1 {
            Some(Box2D { x1, y1, x2, y2 })
        } else {
            None
        }
    }
}

/// Pinhole camera with a rigid global-to-camera transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel<S = f64> {
    pub id: CameraId,
    /// 3x3 intrinsic matrix, row-major, pixel units.
    pub intrinsics: Mat3Repr<S>,
    /// Global-to-camera rotation, row-major.
    pub rotation: Mat3Repr<S>,
    /// Global-to-camera translation (meters).
    pub translation: [S; 3],
    pub width: u32,
    pub height: u32,
}

/// Serializable row-major 3x3 matrix.
pub type Mat3Repr<S> = [[S; 3]; 3];

impl<S: Real> CameraModel<S> {
    pub fn intrinsics_mat(&self) -> Mat3<S> {
        Mat3(self.intrinsics)
    }

    pub fn rotation_mat(&self) -> Mat3<S> {
        Mat3(self.rotation)
    }

    pub fn translation_vec(&self) -> Vec3<S> {
        Vec3(self.translation)
    }

    /// Transform a global point into the camera frame.
    pub fn to_camera(&self, p: &Vec3<S>) -> Vec3<S> {
        self.rotation_mat().mul_vec(p).add(&self.translation_vec())
    }

    /// Camera center expressed in the global frame.
    pub fn center_global(&self) -> Vec3<S> {
        self.rotation_mat()
            .transpose()
            .mul_vec(&self.translation_vec())
            .scale(-S::one())
    }

    /// Projects a camera-frame point to pixels; caller must ensure `z > 0`.
    fn camera_to_pixel(&self, p: &Vec3<S>) -> [S; 2] {
        let k = &self.intrinsics;
        let inv_z = S::one() / p.z();
        [
            (k[0][0] * p.x() + k[0][1] * p.y() + k[0][2] * p.z()) * inv_z,
            (k[1][0] * p.x() + k[1][1] * p.y() + k[1][2] * p.z()) * inv_z,
        ]
    }

    /// Projects a global point; `None` if it lies on or behind the camera plane.
    pub fn project_point(&self, p: &Vec3<S>) -> Option<[S; 2]> {
        let pc = self.to_camera(p);
        if pc.z() <= S::zero() {
            return None;
        }
        Some(self.camera_to_pixel(&pc))
    }

    /// The global-frame ray through a pixel: `(origin, unit direction)`.
    pub fn backproject_pixel(&self, u: S, v: S) -> Option<(Vec3<S>, Vec3<S>)> {
        let kinv = self.intrinsics_mat().inverse()?;
        let dir_cam = kinv.mul_vec(&Vec3::new(u, v, S::one()));
        let dir_global = self.rotation_mat().transpose().mul_vec(&dir_cam);
        Some((self.center_global(), dir_global.normalized()))
    }

    /// Validates intrinsic and extrinsic invariants.
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.intrinsics[0][0] <= S::zero() || self.intrinsics[1][1] <= S::zero() {
            return Err(GeometryError::BadIntrinsics { camera: self.id.clone() });
        }
        let defect = self.rotation_mat().orthonormality_defect();
        if defect >= real::<S>(1e-9) {
            return Err(GeometryError::NonOrthonormalRotation {
                camera: self.id.clone(),
                defect: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

/// Validation failures for camera models.
#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("camera {camera}: focal entries must be positive")]
    BadIntrinsics { camera: String },
    #[error("camera {camera}: rotation is not orthonormal (defect {defect:e})")]
    NonOrthonormalRotation { camera: String, defect: f64 },
}

/// Axis-aligned hull of the visible projected corners, before image clipping.
///
/// Corners on or behind the camera plane are dropped; `None` when every
/// corner is behind.
pub fn project_box_unclipped<S: Real>(b: &Box3D<S>, cam: &CameraModel<S>) -> Option<Box2D<S>> {
    let mut min_u = S::infinity();
    let mut max_u = S::neg_infinity();
    let mut min_v = S::infinity();
    let mut max_v = S::neg_infinity();
    let mut any = false;
    for corner in b.corners() {
        if let Some([u, v]) = cam.project_point(&corner) {
            min_u = min_u.min(u);
            max_u = max_u.max(u);
            min_v = min_v.min(v);
            max_v = max_v.max(v);
            any = true;
        }
    }
    if !any {
        return None;
    }
    Some(Box2D { x1: min_u, y1: min_v, x2: max_u, y2: max_v })
}

/// Projects a 3D box into a camera and clips to image bounds.
///
/// Returns `None` when the box is entirely behind the camera plane or the
/// clipped rectangle has zero area.
pub fn project_box<S: Real>(b: &Box3D<S>, cam: &CameraModel<S>) -> Option<Box2D<S>> {
    let hull = project_box_unclipped(b, cam)?;
    let x1 = hull.x1.max(S::zero());
    let y1 = hull.y1.max(S::zero());
    let x2 = hull.x2.min(real::<S>(cam.width as f64));
    let y2 = hull.y2.min(real::<S>(cam.height as f64));
    if x2 > x1 && y2 > y1 {
        Some(Box2D { x1, y1, x2, y2 })
    } else {
        None
    }
}

/// Picks the camera where the box projects with the largest pixel area.
///
/// Invisible cameras contribute nothing; ties resolve to the earliest camera
/// in `cams`. `None` when the box is invisible everywhere.
pub fn best_camera_match<'a, S: Real>(
    b: &Box3D<S>,
    cams: &'a [CameraModel<S>],
) -> Option<(&'a CameraId, Box2D<S>)> {
    let mut best: Option<(&CameraId, Box2D<S>)> = None;
    for cam in cams {
        if let Some(rect) = project_box(b, cam) {
            let better = match &best {
                Some((_, cur)) => rect.area() > cur.area(),
                None => true,
            };
            if better {
                best = Some((&cam.id, rect));
            }
        }
    }
    best
}
