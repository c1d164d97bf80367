//! Frame scheduler and pipeline orchestration.
//!
//! A [`Tracker`] folds timestamped frames in order: predict, preprocess,
//! associate, update, manage lifecycles, spawn, snapshot. One scene is
//! strictly sequential; distinct scenes run independently.

use serde::{Deserialize, Serialize};

use crate::config::TrackerConfig;
use crate::estimation::{
    lift_bev_observation, MatchOutcome, MotionObservation, NoiseParams, ScoreParams, Stage, Track,
    TrackStatus,
};
use crate::geometry::{Box3D, CameraModel};
use crate::matching::{associate_async, associate_sync, AssociationResult, TrackCandidate};
use crate::preprocess::{preprocess_async, preprocess_sync, Detection2D, Detection3D};

/// Frame synchronization status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    /// Multi-modal keyframe: 3D and 2D detections.
    Sync,
    /// Camera-only intermediate frame.
    Async,
}

impl FrameKind {
    pub fn stage(self) -> Stage {
        match self {
            FrameKind::Sync => Stage::Sync,
            FrameKind::Async => Stage::Async,
        }
    }
}

/// A timestamped detection bundle. Async frames never carry 3D detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub kind: FrameKind,
    pub dets3d: Vec<Detection3D>,
    pub dets2d: Vec<Detection2D>,
    /// Camera models valid at this timestamp.
    pub cameras: Vec<CameraModel>,
}

/// Per-track state view emitted after each frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotEntry {
    pub id: u64,
    pub class: String,
    pub box3d: Box3D,
    pub vx: f64,
    pub vy: f64,
    pub score: f64,
    pub status: TrackStatus,
}

/// All surviving tracks at one frame timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSnapshot {
    pub t: f64,
    pub kind: FrameKind,
    pub entries: Vec<SnapshotEntry>,
}

/// Tracker failures.
#[derive(Debug, thiserror::Error)]
pub enum TrackError {
    #[error("frame at t={t} arrived out of order (last processed t={last})")]
    OutOfOrder { t: f64, last: f64 },
    #[error("async frame at t={t} carries 3D detections")]
    AsyncWith3D { t: f64 },
    #[error(transparent)]
    Estimation(#[from] crate::estimation::EstimationError),
}

/// Stateful single-scene tracker.
#[derive(Debug)]
pub struct Tracker {
    cfg: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u64,
    last_t: Option<f64>,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Self {
        Tracker { cfg, tracks: Vec::new(), next_id: 1, last_t: None }
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    fn noise_for(&self, class: &str) -> NoiseParams<f64> {
        NoiseParams::from_config(&self.cfg.motion, class)
    }

    fn score_for(&self, class: &str) -> ScoreParams<f64> {
        ScoreParams::from_config(&self.cfg.score, class)
    }

    /// Processes one frame and returns the post-update snapshot.
    pub fn step(&mut self, frame: &Frame) -> Result<TrackSnapshot, TrackError> {
        if let Some(last) = self.last_t {
            if frame.t <= last {
                return Err(TrackError::OutOfOrder { t: frame.t, last });
            }
        }
        if frame.kind == FrameKind::Async && !frame.dets3d.is_empty() {
            return Err(TrackError::AsyncWith3D { t: frame.t });
        }

        // Predict every live track to the frame timestamp.
        if let Some(last) = self.last_t {
            let dt = frame.t - last;
            let stage = frame.kind.stage();
            for track in &mut self.tracks {
                let noise = NoiseParams::from_config(&self.cfg.motion, &track.class);
                let params = ScoreParams::from_config(&self.cfg.score, &track.class);
                track.predict(dt, stage, &noise, &params)?;
            }
        }
        self.last_t = Some(frame.t);

        // Preprocess and associate.
        let candidates: Vec<TrackCandidate> = self
            .tracks
            .iter()
            .map(|t| TrackCandidate { class: t.class.clone(), box3d: t.box3d() })
            .collect();
        let association: AssociationResult = match frame.kind {
            FrameKind::Sync => {
                let pre = preprocess_sync(
                    frame.dets3d.clone(),
                    frame.dets2d.clone(),
                    &frame.cameras,
                    &self.cfg.preprocess,
                );
                associate_sync(&candidates, pre, &frame.cameras, &self.cfg.matcher)
            }
            FrameKind::Async => {
                let pre = preprocess_async(frame.dets2d.clone());
                let crate::preprocess::PreprocessOutput::Async { single2d } = pre else {
                    unreachable!()
                };
                associate_async(&candidates, single2d, &frame.cameras, &self.cfg.matcher)
            }
        };

        // Motion and score updates per association bucket.
        let mut outcomes: Vec<MatchOutcome<f64>> =
            vec![MatchOutcome::Unmatched; self.tracks.len()];
        for (ti, mix) in &association.mix_pairs {
            let noise = self.noise_for(&self.tracks[*ti].class);
            let params = self.score_for(&self.tracks[*ti].class);
            self.tracks[*ti]
                .update_motion(MotionObservation::Full(&mix.det3d.box3d), &noise)?;
            let fused = crate::estimation::fuse_scores(mix.det3d.score, mix.det2d.score, params.alpha);
            outcomes[*ti] = MatchOutcome::MatchedSync { obs_score: fused };
        }
        for (ti, det) in &association.pure3d_pairs {
            let noise = self.noise_for(&self.tracks[*ti].class);
            self.tracks[*ti]
                .update_motion(MotionObservation::Full(&det.box3d), &noise)?;
            outcomes[*ti] = MatchOutcome::MatchedSync { obs_score: det.score };
        }
        for (ti, det) in association.pure2d_pairs.iter().chain(&association.async_pairs) {
            let noise = self.noise_for(&self.tracks[*ti].class);
            // Camera-only observation: lift to a planar position along the
            // detection's pixel ray at the predicted range.
            if let Some(cam) = frame.cameras.iter().find(|c| c.id == det.camera) {
                if let Some([x, y]) =
                    lift_bev_observation(&self.tracks[*ti].box3d(), &det.box2d, cam)
                {
                    self.tracks[*ti]
                        .update_motion(MotionObservation::BevPosition { x, y }, &noise)?;
                }
            }
            outcomes[*ti] = MatchOutcome::MatchedAsync { obs_score: det.score };
        }

        for (ti, outcome) in outcomes.into_iter().enumerate() {
            let params = self.score_for(&self.tracks[ti].class);
            self.tracks[ti].lifecycle_step(outcome, &params, frame.t);
        }
        self.tracks.retain(|t| t.status != TrackStatus::Dead);

        // Spawn from unmatched multi-modal evidence; camera-only detections
        // never spawn tracks.
        if frame.kind == FrameKind::Sync {
            for mix in &association.unmatched_mix {
                let noise = self.noise_for(&mix.det3d.class);
                let params = self.score_for(&mix.det3d.class);
                self.tracks.push(Track::spawn_mix(self.next_id, mix, &noise, &params));
                self.next_id += 1;
            }
            for det in &association.unmatched_pure3d {
                let noise = self.noise_for(&det.class);
                let params = self.score_for(&det.class);
                self.tracks.push(Track::spawn_pure3d(self.next_id, det, &noise, &params));
                self.next_id += 1;
            }
        }

        Ok(self.snapshot(frame.t, frame.kind))
    }

    fn snapshot(&self, t: f64, kind: FrameKind) -> TrackSnapshot {
        let mut entries: Vec<SnapshotEntry> = self
            .tracks
            .iter()
            .filter(|tr| tr.status == TrackStatus::Active)
            .map(|tr| {
                let [vx, vy] = tr.velocity();
                SnapshotEntry {
                    id: tr.id,
                    class: tr.class.clone(),
                    box3d: tr.box3d(),
                    vx,
                    vy,
                    score: tr.score.clamp(0.0, 1.0),
                    status: tr.status,
                }
            })
            .collect();
        entries.sort_by_key(|e| e.id);
        TrackSnapshot { t, kind, entries }
    }
}

/// Folds a whole ordered scene; deterministic given config and input.
pub fn run_scene(frames: &[Frame], cfg: &TrackerConfig) -> Result<Vec<TrackSnapshot>, TrackError> {
    let mut tracker = Tracker::new(cfg.clone());
    let mut out = Vec::with_capacity(frames.len());
    for frame in frames {
        out.push(tracker.step(frame)?);
    }
    Ok(out)
}

/// Drops async frames, keeping only multi-modal keyframes.
pub fn sync_only(frames: &[Frame]) -> Vec<Frame> {
    frames.iter().filter(|f| f.kind == FrameKind::Sync).cloned().collect()
}
