//! Trajectory state estimation: Kalman motion filtering with
//! modality-scaled noise, score prediction/update and lifecycle management.

pub mod kalman;
pub mod score;

pub use kalman::{NoiseParams, NumericalFault, CovMat, StateVec, STATE_DIM};
pub use score::{
    fuse_scores, fused_variance, noisy_or, optimal_alpha, strategy_update, update_score_async,
    update_score_sync, updated_score_variance,
};

use serde::{Deserialize, Serialize};

use crate::config::{LifecycleMode, ScoreConfig, ScoreStrategy};
use crate::geometry::{Box2D, Box3D, CameraModel};
use crate::preprocess::{Detection3D, MixDetection};
use crate::scalar::{real, Real};

/// Frame synchronization stage seen by the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Sync,
    Async,
}

/// Track lifecycle status. Dead tracks never come back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Active,
    Tentative,
    Dead,
}

/// Resolved per-class score/lifecycle parameters.
#[derive(Debug, Clone, Copy)]
pub struct ScoreParams<S = f64> {
    pub sigma_sync: S,
    pub sigma_async: S,
    pub alpha: S,
    pub beta: S,
    pub deletion_threshold: S,
    pub strategy: ScoreStrategy,
    pub ema_weight: S,
    pub lifecycle: LifecycleMode,
}

impl ScoreParams<f64> {
    pub fn from_config(cfg: &ScoreConfig, class: &str) -> Self {
        ScoreParams {
            sigma_sync: *cfg.sigma_sync.get(class),
            sigma_async: *cfg.sigma_async.get(class),
            alpha: *cfg.alpha.get(class),
            beta: *cfg.beta.get(class),
            deletion_threshold: *cfg.deletion_threshold.get(class),
            strategy: cfg.strategy,
            ema_weight: cfg.ema_weight,
            lifecycle: cfg.lifecycle,
        }
    }
}

/// Estimation failures.
#[derive(Debug, thiserror::Error)]
pub enum EstimationError {
    #[error("prediction requires a positive time step, got {0}")]
    NonPositiveDt(f64),
    #[error(transparent)]
    Numerical(#[from] NumericalFault),
}

/// Motion observation consumed by the Kalman update.
#[derive(Debug, Clone, Copy)]
pub enum MotionObservation<'a, S = f64> {
    /// Full 7-dim box observation from a 3D detection (base noise).
    Full(&'a Box3D<S>),
    /// Planar position lifted from a camera-only match; measurement noise is
    /// inflated by gamma since the lift lacks cross-modal verification.
    BevPosition { x: S, y: S },
}

/// Association outcome for one track in one frame, as seen by the lifecycle.
#[derive(Debug, Clone, Copy)]
pub enum MatchOutcome<S = f64> {
    /// Matched at a multi-modal frame; carries the effective observation
    /// score (fused for paired detections, raw 3D score otherwise).
    MatchedSync { obs_score: S },
    /// Matched by a camera-only observation (attenuated by beta internally).
    MatchedAsync { obs_score: S },
    Unmatched,
}

/// A live trajectory: Kalman state plus confidence and lifecycle bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Track<S = f64> {
    pub id: u64,
    pub class: String,
    state: StateVec<S>,
    cov: CovMat<S>,
    /// Score after the most recent predict (prior) or lifecycle step
    /// (posterior).
    pub score: S,
    score_sum: S,
    score_frames: u32,
    pub hits: u32,
    pub age: u32,
    miss_streak: u32,
    pub status: TrackStatus,
    pub last_update_t: f64,
}

impl<S: Real> Track<S> {
    fn base(
        id: u64,
        class: String,
        box3d: &Box3D<S>,
        score: S,
        t: f64,
        noise: &NoiseParams<S>,
        params: &ScoreParams<S>,
    ) -> Self {
        let mut state = [S::zero(); STATE_DIM];
        state[0] = box3d.x;
        state[1] = box3d.y;
        state[2] = box3d.z;
        state[3] = box3d.w;
        state[4] = box3d.l;
        state[5] = box3d.h;
        state[6] = box3d.heading;
        let status = match params.lifecycle {
            LifecycleMode::Score => TrackStatus::Active,
            LifecycleMode::Count { min_hits, .. } => {
                if min_hits <= 1 {
                    TrackStatus::Active
                } else {
                    TrackStatus::Tentative
                }
            }
        };
        Track {
            id,
            class,
            state,
            cov: noise.initial_cov(),
            score,
            score_sum: score,
            score_frames: 1,
            hits: 1,
            age: 0,
            miss_streak: 0,
            status,
            last_update_t: t,
        }
    }

    /// New trajectory from an unmatched paired detection; initial score is
    /// the cross-modal fusion of both member scores.
    pub fn spawn_mix(
        id: u64,
        det: &MixDetection<S>,
        noise: &NoiseParams<S>,
        params: &ScoreParams<S>,
    ) -> Self {
        let score = fuse_scores(det.det3d.score, det.det2d.score, params.alpha);
        Track::base(id, det.det3d.class.clone(), &det.det3d.box3d, score, det.det3d.t, noise, params)
    }

    /// New trajectory from an unmatched pure 3D detection.
    pub fn spawn_pure3d(
        id: u64,
        det: &Detection3D<S>,
        noise: &NoiseParams<S>,
        params: &ScoreParams<S>,
    ) -> Self {
        Track::base(id, det.class.clone(), &det.box3d, det.score, det.t, noise, params)
    }

    pub fn box3d(&self) -> Box3D<S> {
        let min_dim = real::<S>(0.05);
        Box3D::new(
            self.state[0],
            self.state[1],
            self.state[2],
            self.state[3].max(min_dim),
            self.state[4].max(min_dim),
            self.state[5].max(min_dim),
            self.state[6],
        )
    }

    pub fn velocity(&self) -> [S; 2] {
        [self.state[7], self.state[8]]
    }

    pub fn state_vector(&self) -> &StateVec<S> {
        &self.state
    }

    pub fn covariance(&self) -> &CovMat<S> {
        &self.cov
    }

    /// Full-lifetime running mean of posterior scores.
    pub fn average_score(&self) -> S {
        self.score_sum / real::<S>(self.score_frames as f64)
    }

    /// Time update: constant-velocity motion over `dt` and stage-specific
    /// score decay. Rejects non-positive steps.
    pub fn predict(
        &mut self,
        dt: S,
        stage: Stage,
        noise: &NoiseParams<S>,
        params: &ScoreParams<S>,
    ) -> Result<(), EstimationError> {
        if dt <= S::zero() {
            return Err(EstimationError::NonPositiveDt(dt.to_f64().unwrap_or(f64::NAN)));
        }
        kalman::predict(&mut self.state, &mut self.cov, dt, noise);
        if matches!(params.lifecycle, LifecycleMode::Score) {
            let sigma = match stage {
                Stage::Sync => params.sigma_sync,
                Stage::Async => params.sigma_async,
            };
            self.score *= sigma;
        }
        self.age += 1;
        Ok(())
    }

    /// Measurement update. Full observations use the base noise; lifted
    /// planar observations are inflated by gamma.
    pub fn update_motion(
        &mut self,
        obs: MotionObservation<S>,
        noise: &NoiseParams<S>,
    ) -> Result<(), EstimationError> {
        match obs {
            MotionObservation::Full(b) => {
                let z = [b.x, b.y, b.z, b.w, b.l, b.h, b.heading];
                let idx = [0usize, 1, 2, 3, 4, 5, 6];
                let r = [
                    noise.c_position,
                    noise.c_position,
                    noise.c_position,
                    noise.c_dims,
                    noise.c_dims,
                    noise.c_dims,
                    noise.c_heading,
                ];
                kalman::update(&mut self.state, &mut self.cov, &z, &idx, &r)?;
            }
            MotionObservation::BevPosition { x, y } => {
                // Robust step: clamp the innovation toward the prediction so
                // one bad ray cannot yank the track.
                let mut dx = x - self.state[0];
                let mut dy = y - self.state[1];
                let norm = dx.hypot(dy);
                if norm > noise.lift_innovation_cap && norm > S::zero() {
                    let scale = noise.lift_innovation_cap / norm;
                    dx *= scale;
                    dy *= scale;
                }
                let z = [self.state[0] + dx, self.state[1] + dy];
                let r_xy = noise.gamma * noise.c_position;
                kalman::update(&mut self.state, &mut self.cov, &z, &[0, 1], &[r_xy, r_xy])?;
            }
        }
        // Keep dimensions physically meaningful after large innovations.
        let min_dim = real::<S>(0.05);
        for d in 3..6 {
            self.state[d] = self.state[d].max(min_dim);
        }
        Ok(())
    }

    /// Applies the frame's score update, refreshes the online average and
    /// decides survival. Unmatched tracks keep their prior as posterior.
    pub fn lifecycle_step(&mut self, outcome: MatchOutcome<S>, params: &ScoreParams<S>, t: f64) {
        match params.lifecycle {
            LifecycleMode::Score => {
                match outcome {
                    MatchOutcome::MatchedSync { obs_score } => {
                        self.score =
                            strategy_update(params.strategy, self.score, obs_score, params.ema_weight);
                        self.hits += 1;
                        self.miss_streak = 0;
                        self.last_update_t = t;
                    }
                    MatchOutcome::MatchedAsync { obs_score } => {
                        self.score = strategy_update(
                            params.strategy,
                            self.score,
                            params.beta * obs_score,
                            params.ema_weight,
                        );
                        self.hits += 1;
                        self.miss_streak = 0;
                        self.last_update_t = t;
                    }
                    MatchOutcome::Unmatched => {
                        self.miss_streak += 1;
                    }
                }
                self.score_sum += self.score;
                self.score_frames += 1;
                if self.average_score() < params.deletion_threshold {
                    self.status = TrackStatus::Dead;
                }
            }
            LifecycleMode::Count { min_hits, max_age } => {
                match outcome {
                    MatchOutcome::MatchedSync { obs_score }
                    | MatchOutcome::MatchedAsync { obs_score } => {
                        self.score = obs_score;
                        self.hits += 1;
                        self.miss_streak = 0;
                        self.last_update_t = t;
                        if self.status == TrackStatus::Tentative && self.hits >= min_hits {
                            self.status = TrackStatus::Active;
                        }
                    }
                    MatchOutcome::Unmatched => {
                        self.miss_streak += 1;
                        if self.miss_streak >= max_age {
                            self.status = TrackStatus::Dead;
                        }
                    }
                }
                self.score_sum += self.score;
                self.score_frames += 1;
            }
        }
    }
}

/// Lifts a camera detection to a planar position observation by casting the
/// pixel-center ray and keeping the track's predicted range from the camera.
pub fn lift_bev_observation<S: Real>(
    predicted: &Box3D<S>,
    det_box: &Box2D<S>,
    cam: &CameraModel<S>,
) -> Option<[S; 2]> {
    let [u, v] = det_box.center();
    let (origin, dir) = cam.backproject_pixel(u, v)?;
    let range = predicted.center().sub(&origin).norm();
    let p = origin.add(&dir.scale(range));
    Some([p.x(), p.y()])
}
