//! Ready-made rigs and stress scenarios used by tests, benchmarks and the
//! command-line walkthroughs.

use crate::geometry::CameraModel;
use crate::linalg::Mat3;

use super::{
    FalsePositives, ObjectSpawner, ScenarioConfig, ScoreDip, SensorNoise, TrajectoryModel,
};

/// A ring of `n` outward-facing cameras (yaw-spaced) at 1.5 m height.
pub fn ring_rig(n: usize) -> Vec<CameraModel> {
    // Base rotation: camera looking along global +x with z up.
    let base = Mat3([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]]);
    (0..n)
        .map(|i| {
            let yaw = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let rot = base.mul_mat(&Mat3::rot_z(-yaw));
            // Camera center at the origin, 1.5 m up: t = -R * c.
            let c = crate::linalg::Vec3::new(0.0, 0.0, 1.5);
            let t = rot.mul_vec(&c).scale(-1.0);
            CameraModel {
                id: format!("cam{i}"),
                intrinsics: [[1000.0, 0.0, 800.0], [0.0, 1000.0, 450.0], [0.0, 0.0, 1.0]],
                rotation: rot.0,
                translation: t.0,
                width: 1600,
                height: 900,
            }
        })
        .collect()
}

fn car(start: [f64; 3], heading: f64, model: TrajectoryModel) -> ObjectSpawner {
    ObjectSpawner {
        class: "car".to_string(),
        dims: [1.9, 4.5, 1.6],
        start,
        heading,
        model,
        spawn_time: 0.0,
        despawn_time: None,
        lidar_blackouts: Vec::new(),
        score_dips: Vec::new(),
    }
}

fn pedestrian(start: [f64; 3], model: TrajectoryModel) -> ObjectSpawner {
    ObjectSpawner {
        class: "pedestrian".to_string(),
        dims: [0.7, 0.7, 1.8],
        start,
        heading: 0.0,
        model,
        spawn_time: 0.0,
        despawn_time: None,
        lidar_blackouts: Vec::new(),
        score_dips: Vec::new(),
    }
}

/// A clean scenario: well-separated objects, no noise, no dropouts.
/// A correct tracker should be perfect on it.
pub fn noiseless_scenario(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        duration: 10.0,
        sync_rate_hz: 2.0,
        async_rate_hz: 4.0,
        objects: vec![
            car([12.0, -8.0, 0.0], 0.0, TrajectoryModel::ConstantVelocity { vx: 0.0, vy: 1.6 }),
            car([20.0, 8.0, 0.0], 0.0, TrajectoryModel::ConstantVelocity { vx: -0.5, vy: -1.0 }),
            pedestrian([8.0, 4.0, 0.0], TrajectoryModel::ConstantVelocity { vx: 0.6, vy: 0.0 }),
        ],
        noise: SensorNoise::default(),
        false_positives: FalsePositives::default(),
        cameras: ring_rig(6),
        extrinsic_sigma: 0.0,
        seed,
    }
}

/// Stress scenario exercising camera-only continuity: maneuvering objects
/// lose their LiDAR returns for whole keyframe stretches (so coasting
/// predictions drift), confidence dips weaken 3D evidence, and clutter
/// pressures the lifecycle.
pub fn stress_scenario(seed: u64) -> ScenarioConfig {
    // Gently curving car that goes dark mid-scene: coasting drifts, camera
    // corrections keep it matched.
    let mut a = car(
        [15.0, -9.0, 0.0],
        std::f64::consts::FRAC_PI_2,
        TrajectoryModel::Turning { speed: 2.4, yaw_rate: 0.15 },
    );
    a.lidar_blackouts = vec![[3.0, 5.5]];
    let mut b = car([22.0, 9.0, 0.0], 0.0, TrajectoryModel::ConstantVelocity { vx: 0.0, vy: -2.4 });
    b.score_dips = vec![ScoreDip { start: 6.0, end: 8.0, mean: 0.25 }];
    // Harder arc, dark through part of it: drifts toward the 2 m gate
    // without camera corrections.
    let mut c = car([25.0, -2.0, 0.0], 0.9, TrajectoryModel::Turning { speed: 4.0, yaw_rate: 0.22 });
    c.lidar_blackouts = vec![[4.5, 7.0]];
    // Stop-and-go pedestrian dark across a go/stop transition.
    let mut d = pedestrian(
        [8.0, 2.0, 0.0],
        TrajectoryModel::StopAndGo { vx: 1.4, vy: 0.4, move_duration: 2.0, stop_duration: 1.5 },
    );
    d.lidar_blackouts = vec![[1.5, 4.0]];
    d.score_dips = vec![ScoreDip { start: 6.0, end: 8.0, mean: 0.3 }];
    let e = pedestrian([6.0, -4.0, 0.0], TrajectoryModel::ConstantVelocity { vx: 0.9, vy: 0.5 });

    ScenarioConfig {
        duration: 10.0,
        sync_rate_hz: 2.0,
        async_rate_hz: 4.0,
        objects: vec![a, b, c, d, e],
        noise: SensorNoise {
            position_sigma: 0.25,
            dim_sigma: 0.05,
            heading_sigma: 0.05,
            pixel_sigma: 4.0,
            dropout_3d: 0.10,
            dropout_2d: 0.05,
            score_sigma: 0.08,
            score_mean_3d: 0.75,
            score_mean_2d_sync: 0.7,
            score_mean_2d_async: 0.6,
        },
        false_positives: FalsePositives {
            rate_3d: 0.35,
            rate_2d: 0.3,
            region: [[-5.0, 45.0], [-25.0, 25.0]],
            score_range: [0.2, 0.55],
        },
        cameras: ring_rig(6),
        extrinsic_sigma: 0.0,
        seed,
    }
}
