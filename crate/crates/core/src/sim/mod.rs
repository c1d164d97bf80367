//! Synthetic scene and asynchronous-sensor generator.
//!
//! Produces ground truth plus noisy detections at configurable rates:
//! multi-modal keyframes at the sync rate and camera-only frames placed at
//! the midpoints between consecutive keyframes (or evenly for higher rate
//! ratios). Everything is deterministic per seed.

pub mod presets;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::{project_box, Box2D, Box3D, CameraModel};
use crate::linalg::{Mat3, Vec3};
use crate::preprocess::{Detection2D, Detection3D};
use crate::scalar::normalize_angle;
use crate::tracker::{Frame, FrameKind};

/// Ground-truth object pose at one timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct GtObject {
    pub id: u64,
    pub class: String,
    pub box3d: Box3D,
    pub vx: f64,
    pub vy: f64,
}

/// Ground truth for one frame timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct GtFrame {
    pub t: f64,
    pub kind: FrameKind,
    pub objects: Vec<GtObject>,
}

/// Ground truth for a whole scene; ids are stable across an object's life.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub frames: Vec<GtFrame>,
}

impl GroundTruth {
    /// Frames restricted to multi-modal keyframes.
    pub fn sync_frames(&self) -> Vec<GtFrame> {
        self.frames.iter().filter(|f| f.kind == FrameKind::Sync).cloned().collect()
    }
}

/// Scripted low-confidence window for an object's 3D detections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreDip {
    pub start: f64,
    pub end: f64,
    pub mean: f64,
}

/// Object trajectory models with closed-form pose evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryModel {
    ConstantVelocity { vx: f64, vy: f64 },
    StopAndGo { vx: f64, vy: f64, move_duration: f64, stop_duration: f64 },
    Turning { speed: f64, yaw_rate: f64 },
}

/// One simulated object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpawner {
    pub class: String,
    /// Width, length, height (meters).
    pub dims: [f64; 3],
    /// Initial center position.
    pub start: [f64; 3],
    #[serde(default)]
    pub heading: f64,
    pub model: TrajectoryModel,
    #[serde(default)]
    pub spawn_time: f64,
    /// Absent means the object lives to the end of the scene.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub despawn_time: Option<f64>,
    /// Windows during which this object produces no 3D detections.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lidar_blackouts: Vec<[f64; 2]>,
    /// Windows during which 3D detection scores drop to the given mean.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub score_dips: Vec<ScoreDip>,
}

/// Detection noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorNoise {
    pub position_sigma: f64,
    pub dim_sigma: f64,
    pub heading_sigma: f64,
    pub pixel_sigma: f64,
    pub dropout_3d: f64,
    pub dropout_2d: f64,
    pub score_sigma: f64,
    pub score_mean_3d: f64,
    pub score_mean_2d_sync: f64,
    pub score_mean_2d_async: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        SensorNoise {
            position_sigma: 0.0,
            dim_sigma: 0.0,
            heading_sigma: 0.0,
            pixel_sigma: 0.0,
            dropout_3d: 0.0,
            dropout_2d: 0.0,
            score_sigma: 0.0,
            score_mean_3d: 0.8,
            score_mean_2d_sync: 0.7,
            score_mean_2d_async: 0.6,
        }
    }
}

/// Clutter model: expected spurious detections per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FalsePositives {
    pub rate_3d: f64,
    pub rate_2d: f64,
    /// Spatial region `[[x_min, x_max], [y_min, y_max]]` for 3D clutter.
    pub region: [[f64; 2]; 2],
    pub score_range: [f64; 2],
}

impl Default for FalsePositives {
    fn default() -> Self {
        FalsePositives {
            rate_3d: 0.0,
            rate_2d: 0.0,
            region: [[-40.0, 40.0], [-40.0, 40.0]],
            score_range: [0.2, 0.6],
        }
    }
}

/// Full scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration: f64,
    #[serde(default = "default_sync_rate")]
    pub sync_rate_hz: f64,
    #[serde(default = "default_async_rate")]
    pub async_rate_hz: f64,
    pub objects: Vec<ObjectSpawner>,
    #[serde(default)]
    pub noise: SensorNoise,
    #[serde(default)]
    pub false_positives: FalsePositives,
    pub cameras: Vec<CameraModel>,
    /// Extrinsic miscalibration injected into the cameras the tracker sees
    /// (detections are produced with the true geometry).
    #[serde(default)]
    pub extrinsic_sigma: f64,
    pub seed: u64,
}

fn default_sync_rate() -> f64 {
    2.0
}
fn default_async_rate() -> f64 {
    4.0
}

/// Scenario validation failures.
#[derive(Debug, thiserror::Error)]
#[error("scenario: {0}")]
pub struct ScenarioError(pub String);

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.duration <= 0.0 {
            return Err(ScenarioError("duration must be positive".into()));
        }
        if self.sync_rate_hz <= 0.0 || self.async_rate_hz < self.sync_rate_hz {
            return Err(ScenarioError(
                "rates must be positive with async_rate_hz >= sync_rate_hz".into(),
            ));
        }
        for p in [
            self.noise.dropout_3d,
            self.noise.dropout_2d,
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ScenarioError("dropout probabilities must be in [0, 1]".into()));
            }
        }
        for cam in &self.cameras {
            cam.validate().map_err(|e| ScenarioError(e.to_string()))?;
        }
        Ok(())
    }
}

/// Pose of an object at scene time `t`, if alive.
fn pose_at(obj: &ObjectSpawner, t: f64) -> Option<(Box3D, [f64; 2])> {
    if t < obj.spawn_time || obj.despawn_time.is_some_and(|d| t >= d) {
        return None;
    }
    let tau = t - obj.spawn_time;
    let [w, l, h] = obj.dims;
    let [x0, y0, z0] = obj.start;
    let (x, y, heading, vx, vy) = match obj.model {
        TrajectoryModel::ConstantVelocity { vx, vy } => {
            let heading = if vx.hypot(vy) > 1e-9 { vy.atan2(vx) } else { obj.heading };
            (x0 + vx * tau, y0 + vy * tau, heading, vx, vy)
        }
        TrajectoryModel::StopAndGo { vx, vy, move_duration, stop_duration } => {
            let cycle = move_duration + stop_duration;
            let (moved, moving) = if cycle <= 0.0 {
                (0.0, false)
            } else {
                let full = (tau / cycle).floor();
                let within = tau - full * cycle;
                (
                    full * move_duration + within.min(move_duration),
                    within < move_duration,
                )
            };
            let heading = if vx.hypot(vy) > 1e-9 { vy.atan2(vx) } else { obj.heading };
            let (cvx, cvy) = if moving { (vx, vy) } else { (0.0, 0.0) };
            (x0 + vx * moved, y0 + vy * moved, heading, cvx, cvy)
        }
        TrajectoryModel::Turning { speed, yaw_rate } => {
            let theta0 = obj.heading;
            let theta = theta0 + yaw_rate * tau;
            if yaw_rate.abs() < 1e-9 {
                (
                    x0 + speed * theta0.cos() * tau,
                    y0 + speed * theta0.sin() * tau,
                    theta0,
                    speed * theta0.cos(),
                    speed * theta0.sin(),
                )
            } else {
                (
                    x0 + speed / yaw_rate * (theta.sin() - theta0.sin()),
                    y0 - speed / yaw_rate * (theta.cos() - theta0.cos()),
                    theta,
                    speed * theta.cos(),
                    speed * theta.sin(),
                )
            }
        }
    };
    Some((Box3D::new(x, y, z0, w, l, h, normalize_angle(heading)), [vx, vy]))
}

fn in_window(windows: &[[f64; 2]], t: f64) -> bool {
    windows.iter().any(|w| t >= w[0] && t < w[1])
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    n * sigma
}

fn clipped_score(rng: &mut ChaCha8Rng, mean: f64, sigma: f64) -> f64 {
    (mean + gaussian(rng, sigma)).clamp(0.01, 1.0)
}

/// Adds zero-mean Gaussian noise (std `sigma`) to each camera's rotation
/// (axis-angle components) and translation, re-orthonormalizing rotations.
/// `sigma = 0` returns the rig unchanged; the same seed draws the same unit
/// perturbation directions for every `sigma`.
pub fn perturb_extrinsics(cams: &[CameraModel], sigma: f64, seed: u64) -> Vec<CameraModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cams.iter()
        .map(|cam| {
            let w = Vec3::new(
                gaussian(&mut rng, 1.0) * sigma,
                gaussian(&mut rng, 1.0) * sigma,
                gaussian(&mut rng, 1.0) * sigma,
            );
            let dt = [
                gaussian(&mut rng, 1.0) * sigma,
                gaussian(&mut rng, 1.0) * sigma,
                gaussian(&mut rng, 1.0) * sigma,
            ];
            if sigma == 0.0 {
                return cam.clone();
            }
            let rot = Mat3::from_axis_angle(&w)
                .mul_mat(&cam.rotation_mat())
                .reorthonormalized();
            let mut out = cam.clone();
            out.rotation = rot.0;
            out.translation = [
                cam.translation[0] + dt[0],
                cam.translation[1] + dt[1],
                cam.translation[2] + dt[2],
            ];
            out
        })
        .collect()
}

/// Frame timestamps: keyframes at the sync rate plus evenly spaced
/// intermediate camera frames matching the async rate.
fn timestamps(cfg: &ScenarioConfig) -> Vec<(f64, FrameKind)> {
    let gap = 1.0 / cfg.sync_rate_hz;
    let ratio = (cfg.async_rate_hz / cfg.sync_rate_hz).round().max(1.0) as usize;
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let t = i as f64 * gap;
        if t >= cfg.duration - 1e-12 {
            break;
        }
        out.push((t, FrameKind::Sync));
        for j in 1..ratio {
            let ta = t + gap * j as f64 / ratio as f64;
            if ta < cfg.duration - 1e-12 {
                out.push((ta, FrameKind::Async));
            }
        }
        i += 1;
    }
    out
}

/// Generates the frame stream and ground truth for a scenario.
///
/// Sync frames carry noisy 3D detections plus per-camera 2D detections;
/// async frames carry 2D detections only. When `extrinsic_sigma > 0` the
/// frames expose a miscalibrated rig while detections keep the true
/// geometry.
pub fn generate(cfg: &ScenarioConfig) -> Result<(Vec<Frame>, GroundTruth), ScenarioError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let true_cams = cfg.cameras.clone();
    let rig_for_tracker = if cfg.extrinsic_sigma > 0.0 {
        perturb_extrinsics(&true_cams, cfg.extrinsic_sigma, cfg.seed ^ 0x4558_5452)
    } else {
        true_cams.clone()
    };

    let mut frames = Vec::new();
    let mut gt = GroundTruth::default();
    for (t, kind) in timestamps(cfg) {
        let mut gt_objects = Vec::new();
        let mut dets3d: Vec<Detection3D> = Vec::new();
        let mut dets2d: Vec<Detection2D> = Vec::new();

        for (idx, obj) in cfg.objects.iter().enumerate() {
            let Some((box3d, [vx, vy])) = pose_at(obj, t) else { continue };
            gt_objects.push(GtObject {
                id: idx as u64 + 1,
                class: obj.class.clone(),
                box3d,
                vx,
                vy,
            });

            if kind == FrameKind::Sync {
                let blackout = in_window(&obj.lidar_blackouts, t);
                let dropped = rng.gen_bool(cfg.noise.dropout_3d.clamp(0.0, 1.0));
                let noisy_box = Box3D::new(
                    box3d.x + gaussian(&mut rng, cfg.noise.position_sigma),
                    box3d.y + gaussian(&mut rng, cfg.noise.position_sigma),
                    box3d.z + gaussian(&mut rng, cfg.noise.position_sigma),
                    (box3d.w + gaussian(&mut rng, cfg.noise.dim_sigma)).max(0.1),
                    (box3d.l + gaussian(&mut rng, cfg.noise.dim_sigma)).max(0.1),
                    (box3d.h + gaussian(&mut rng, cfg.noise.dim_sigma)).max(0.1),
                    box3d.heading + gaussian(&mut rng, cfg.noise.heading_sigma),
                );
                let mean = obj
                    .score_dips
                    .iter()
                    .find(|d| t >= d.start && t < d.end)
                    .map(|d| d.mean)
                    .unwrap_or(cfg.noise.score_mean_3d);
                let score = clipped_score(&mut rng, mean, cfg.noise.score_sigma);
                if !blackout && !dropped {
                    dets3d.push(Detection3D {
                        box3d: noisy_box,
                        score,
                        class: obj.class.clone(),
                        t,
                    });
                }
            }

            // Per-camera 2D detections from the true geometry.
            let mean2d = match kind {
                FrameKind::Sync => cfg.noise.score_mean_2d_sync,
                FrameKind::Async => cfg.noise.score_mean_2d_async,
            };
            for cam in &true_cams {
                let Some(rect) = project_box(&box3d, cam) else { continue };
                let dropped = rng.gen_bool(cfg.noise.dropout_2d.clamp(0.0, 1.0));
                let jitter = |rng: &mut ChaCha8Rng, v: f64, hi: f64| {
                    (v + gaussian(rng, cfg.noise.pixel_sigma)).clamp(0.0, hi)
                };
                let mut x1 = jitter(&mut rng, rect.x1, cam.width as f64);
                let mut x2 = jitter(&mut rng, rect.x2, cam.width as f64);
                let mut y1 = jitter(&mut rng, rect.y1, cam.height as f64);
                let mut y2 = jitter(&mut rng, rect.y2, cam.height as f64);
                if x2 < x1 {
                    std::mem::swap(&mut x1, &mut x2);
                }
                if y2 < y1 {
                    std::mem::swap(&mut y1, &mut y2);
                }
                let score = clipped_score(&mut rng, mean2d, cfg.noise.score_sigma);
                if dropped || x2 - x1 <= 1.0 || y2 - y1 <= 1.0 {
                    continue;
                }
                dets2d.push(Detection2D {
                    box2d: Box2D::new(x1, y1, x2, y2),
                    score,
                    class: obj.class.clone(),
                    camera: cam.id.clone(),
                    t,
                });
            }
        }

        // Clutter.
        if kind == FrameKind::Sync && cfg.false_positives.rate_3d > 0.0 && !cfg.objects.is_empty() {
            let n = Poisson::new(cfg.false_positives.rate_3d)
                .map(|p| p.sample(&mut rng) as usize)
                .unwrap_or(0);
            for _ in 0..n {
                let proto = &cfg.objects[rng.gen_range(0..cfg.objects.len())];
                let [w, l, h] = proto.dims;
                let [[x0, x1], [y0, y1]] = cfg.false_positives.region;
                let [s0, s1] = cfg.false_positives.score_range;
                dets3d.push(Detection3D {
                    box3d: Box3D::new(
                        rng.gen_range(x0..x1),
                        rng.gen_range(y0..y1),
                        proto.start[2],
                        w * rng.gen_range(0.7..1.3),
                        l * rng.gen_range(0.7..1.3),
                        h * rng.gen_range(0.7..1.3),
                        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                    ),
                    score: rng.gen_range(s0..s1),
                    class: proto.class.clone(),
                    t,
                });
            }
        }
        if cfg.false_positives.rate_2d > 0.0 && !cfg.objects.is_empty() && !true_cams.is_empty() {
            let n = Poisson::new(cfg.false_positives.rate_2d)
                .map(|p| p.sample(&mut rng) as usize)
                .unwrap_or(0);
            for _ in 0..n {
                let cam = &true_cams[rng.gen_range(0..true_cams.len())];
                let proto = &cfg.objects[rng.gen_range(0..cfg.objects.len())];
                let [s0, s1] = cfg.false_positives.score_range;
                let cw = rng.gen_range(20.0..200.0);
                let ch = rng.gen_range(20.0..200.0);
                let cx = rng.gen_range(0.0..cam.width as f64);
                let cy = rng.gen_range(0.0..cam.height as f64);
                let x1 = (cx - cw / 2.0).max(0.0);
                let x2 = (cx + cw / 2.0).min(cam.width as f64);
                let y1 = (cy - ch / 2.0).max(0.0);
                let y2 = (cy + ch / 2.0).min(cam.height as f64);
                if x2 - x1 <= 1.0 || y2 - y1 <= 1.0 {
                    continue;
                }
                dets2d.push(Detection2D {
                    box2d: Box2D::new(x1, y1, x2, y2),
                    score: rng.gen_range(s0..s1),
                    class: proto.class.clone(),
                    camera: cam.id.clone(),
                    t,
                });
            }
        }

        gt.frames.push(GtFrame { t, kind, objects: gt_objects });
        frames.push(Frame {
            t,
            kind,
            dets3d: if kind == FrameKind::Sync { dets3d } else { Vec::new() },
            dets2d,
            cameras: rig_for_tracker.clone(),
        });
    }
    Ok((frames, gt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn basic_config() -> ScenarioConfig {
        ScenarioConfig {
            duration: 2.0,
            sync_rate_hz: 2.0,
            async_rate_hz: 4.0,
            objects: vec![ObjectSpawner {
                class: "car".to_string(),
                dims: [2.0, 4.5, 1.6],
                start: [12.0, 0.0, 0.0],
                heading: 0.0,
                model: TrajectoryModel::ConstantVelocity { vx: 0.0, vy: 0.0 },
                spawn_time: 0.0,
                despawn_time: None,
                lidar_blackouts: Vec::new(),
                score_dips: Vec::new(),
            }],
            noise: SensorNoise::default(),
            false_positives: FalsePositives::default(),
            cameras: presets::ring_rig(1),
            extrinsic_sigma: 0.0,
            seed: 7,
        }
    }

    #[test]
    fn two_second_scene_has_four_sync_and_four_async_frames() {
        let (frames, gt) = generate(&basic_config()).unwrap();
        let sync: Vec<f64> = frames
            .iter()
            .filter(|f| f.kind == FrameKind::Sync)
            .map(|f| f.t)
            .collect();
        let async_t: Vec<f64> = frames
            .iter()
            .filter(|f| f.kind == FrameKind::Async)
            .map(|f| f.t)
            .collect();
        assert_eq!(sync, vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(async_t, vec![0.25, 0.75, 1.25, 1.75]);
        assert_eq!(gt.frames.len(), frames.len());
        // Strictly increasing timeline.
        for pair in frames.windows(2) {
            assert!(pair[0].t < pair[1].t);
        }
    }

    #[test]
    fn zero_noise_detections_equal_ground_truth() {
        let cfg = basic_config();
        let (frames, gt) = generate(&cfg).unwrap();
        for (frame, gtf) in frames.iter().zip(&gt.frames) {
            if frame.kind == FrameKind::Sync {
                assert_eq!(frame.dets3d.len(), 1);
                assert_eq!(frame.dets3d[0].box3d, gtf.objects[0].box3d);
                assert_relative_eq!(frame.dets3d[0].score, 0.8);
            } else {
                assert!(frame.dets3d.is_empty());
            }
            // 2D detections equal the exact projection.
            assert_eq!(frame.dets2d.len(), 1);
            let expected = project_box(&gtf.objects[0].box3d, &cfg.cameras[0]).unwrap();
            assert_eq!(frame.dets2d[0].box2d, expected);
        }
    }

    #[test]
    fn full_lidar_dropout_leaves_only_2d() {
        let mut cfg = basic_config();
        cfg.noise.dropout_3d = 1.0;
        let (frames, _) = generate(&cfg).unwrap();
        for frame in &frames {
            assert!(frame.dets3d.is_empty());
            assert!(!frame.dets2d.is_empty());
        }
    }

    #[test]
    fn same_seed_reproduces_identical_scenes() {
        let mut cfg = basic_config();
        cfg.noise.position_sigma = 0.3;
        cfg.noise.score_sigma = 0.1;
        cfg.false_positives.rate_3d = 0.7;
        cfg.false_positives.rate_2d = 0.5;
        let (fa, ga) = generate(&cfg).unwrap();
        let (fb, gb) = generate(&cfg).unwrap();
        assert_eq!(fa, fb);
        assert_eq!(ga, gb);
        cfg.seed += 1;
        let (fc, _) = generate(&cfg).unwrap();
        assert_ne!(fa, fc);
    }

    #[test]
    fn scripted_blackout_suppresses_3d_detections() {
        let mut cfg = basic_config();
        cfg.objects[0].lidar_blackouts = vec![[0.4, 1.1]];
        let (frames, _) = generate(&cfg).unwrap();
        for frame in frames.iter().filter(|f| f.kind == FrameKind::Sync) {
            let expect_empty = frame.t >= 0.4 && frame.t < 1.1;
            assert_eq!(frame.dets3d.is_empty(), expect_empty, "t={}", frame.t);
        }
    }

    #[test]
    fn perturbation_is_zero_at_sigma_zero_and_orthonormal_otherwise() {
        let rig = presets::ring_rig(4);
        let same = perturb_extrinsics(&rig, 0.0, 3);
        assert_eq!(rig, same);
        let moved = perturb_extrinsics(&rig, 0.1, 3);
        assert_ne!(rig, moved);
        for cam in &moved {
            assert!(cam.rotation_mat().orthonormality_defect() < 1e-9);
        }
    }

    #[test]
    fn perturbation_directions_scale_with_sigma() {
        let rig = presets::ring_rig(1);
        let a = perturb_extrinsics(&rig, 0.1, 9);
        let b = perturb_extrinsics(&rig, 0.2, 9);
        let da: Vec<f64> = (0..3).map(|i| a[0].translation[i] - rig[0].translation[i]).collect();
        let db: Vec<f64> = (0..3).map(|i| b[0].translation[i] - rig[0].translation[i]).collect();
        for i in 0..3 {
            assert_relative_eq!(db[i], 2.0 * da[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn perturbation_mean_is_zero_over_many_seeds() {
        let rig = presets::ring_rig(1);
        let n = 10_000;
        let sigma = 0.1;
        let mut sums = [0.0f64; 3];
        for seed in 0..n {
            let p = perturb_extrinsics(&rig, sigma, seed);
            for i in 0..3 {
                sums[i] += p[0].translation[i] - rig[0].translation[i];
            }
        }
        let bound = 3.0 * sigma / (n as f64).sqrt();
        for s in sums {
            let mean = s / n as f64;
            assert!(mean.abs() < bound, "mean {mean} exceeds {bound}");
        }
    }

    #[test]
    fn stop_and_go_pose_is_piecewise_linear() {
        let obj = ObjectSpawner {
            class: "car".into(),
            dims: [2.0, 4.0, 1.5],
            start: [0.0, 0.0, 0.0],
            heading: 0.0,
            model: TrajectoryModel::StopAndGo {
                vx: 2.0,
                vy: 0.0,
                move_duration: 1.0,
                stop_duration: 1.0,
            },
            spawn_time: 0.0,
            despawn_time: None,
            lidar_blackouts: Vec::new(),
            score_dips: Vec::new(),
        };
        let (b, v) = pose_at(&obj, 0.5).unwrap();
        assert_relative_eq!(b.x, 1.0);
        assert_eq!(v, [2.0, 0.0]);
        let (b, v) = pose_at(&obj, 1.5).unwrap();
        assert_relative_eq!(b.x, 2.0); // stopped
        assert_eq!(v, [0.0, 0.0]);
        let (b, _) = pose_at(&obj, 2.5).unwrap();
        assert_relative_eq!(b.x, 3.0); // moving again
    }

    #[test]
    fn turning_model_traces_a_circle() {
        let obj = ObjectSpawner {
            class: "car".into(),
            dims: [2.0, 4.0, 1.5],
            start: [0.0, 0.0, 0.0],
            heading: 0.0,
            model: TrajectoryModel::Turning { speed: 2.0, yaw_rate: 0.5 },
            spawn_time: 0.0,
            despawn_time: None,
            lidar_blackouts: Vec::new(),
            score_dips: Vec::new(),
        };
        // Radius = speed / yaw_rate = 4; the center sits at (0, 4).
        for t in [0.5, 1.0, 2.0, 5.0] {
            let (b, _) = pose_at(&obj, t).unwrap();
            let r = (b.x.powi(2) + (b.y - 4.0).powi(2)).sqrt();
            assert_relative_eq!(r, 4.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn despawned_objects_disappear_from_gt() {
        let mut cfg = basic_config();
        cfg.objects[0].despawn_time = Some(1.0);
        let (_, gt) = generate(&cfg).unwrap();
        for f in &gt.frames {
            assert_eq!(f.objects.is_empty(), f.t >= 1.0, "t={}", f.t);
        }
    }
}
