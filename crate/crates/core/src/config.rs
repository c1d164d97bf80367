//! Tracker configuration: global defaults with per-class overrides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A parameter with a global default and optional per-class overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerClass<T> {
    pub default: T,
    #[serde(default = "BTreeMap::new", skip_serializing_if = "BTreeMap::is_empty")]
    pub per_class: BTreeMap<String, T>,
}

impl<T> PerClass<T> {
    pub fn uniform(default: T) -> Self {
        PerClass { default, per_class: BTreeMap::new() }
    }

    pub fn with_override(mut self, class: &str, value: T) -> Self {
        self.per_class.insert(class.to_string(), value);
        self
    }

    pub fn get(&self, class: &str) -> &T {
        self.per_class.get(class).unwrap_or(&self.default)
    }

    fn values(&self) -> impl Iterator<Item = &T> {
        std::iter::once(&self.default).chain(self.per_class.values())
    }
}

/// Residual used by the image-alignment optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlignMetric {
    #[default]
    Iou,
    Giou,
    CornerDistance,
}

/// Bounded-refinement settings for aligning 3D boxes to their 2D partners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignmentConfig {
    pub enabled: bool,
    #[serde(default)]
    pub metric: AlignMetric,
    /// Central finite-difference step (meters / radians).
    #[serde(default = "default_fd_step")]
    pub step: f64,
    /// Stop once the objective improves by less than this.
    #[serde(default = "default_align_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_align_iterations")]
    pub max_iterations: usize,
    /// Lower bound on box dimensions during refinement (meters).
    #[serde(default = "default_min_dimension")]
    pub min_dimension: f64,
    /// Upper bound on box dimensions during refinement (meters).
    #[serde(default = "default_max_dimension")]
    pub max_dimension: f64,
    /// Per-class `[min, max]` dimension bounds overriding the two fields above.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub dimension_bounds: BTreeMap<String, [f64; 2]>,
    /// Trust region on the center: refinement may move x/y/z at most this
    /// far from the initial state (meters). Keeps the image constraint from
    /// re-localizing the box when projection geometry is unreliable.
    #[serde(default = "default_max_center_shift")]
    pub max_center_shift: f64,
    /// Trust region on dimensions: refinement may rescale w/l/h by at most
    /// this factor (and its inverse). Range measurements already pin the
    /// extent; the image should only fine-tune it.
    #[serde(default = "default_max_dim_scale")]
    pub max_dim_scale: f64,
}

fn default_max_center_shift() -> f64 {
    1.0
}

fn default_max_dim_scale() -> f64 {
    1.5
}

fn default_fd_step() -> f64 {
    1e-3
}
fn default_align_tolerance() -> f64 {
    1e-6
}
fn default_align_iterations() -> usize {
    50
}
fn default_min_dimension() -> f64 {
    0.1
}
fn default_max_dimension() -> f64 {
    30.0
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        AlignmentConfig {
            enabled: true,
            metric: AlignMetric::default(),
            step: default_fd_step(),
            tolerance: default_align_tolerance(),
            max_iterations: default_align_iterations(),
            min_dimension: default_min_dimension(),
            max_dimension: default_max_dimension(),
            dimension_bounds: BTreeMap::new(),
            max_center_shift: default_max_center_shift(),
            max_dim_scale: default_max_dim_scale(),
        }
    }
}

impl AlignmentConfig {
    pub fn dimension_bounds_for(&self, class: &str) -> [f64; 2] {
        self.dimension_bounds
            .get(class)
            .copied()
            .unwrap_or([self.min_dimension, self.max_dimension])
    }
}

/// Detection hygiene and cross-modal pairing settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Minimum detection score kept per class.
    pub score_filter: PerClass<f64>,
    /// Greedy BEV-IoU suppression threshold per class.
    pub nms_iou: PerClass<f64>,
    /// Minimum projection IoU for a 3D-2D pair to count as matched.
    pub match_iou_gate: f64,
    /// Geometric consistency gate for pairing: the offset between the
    /// projected 3D center and the 2D detection center, scaled back to
    /// meters at the detection's range, must stay below this. Rejects
    /// image-plane coincidences that are meters apart in the world.
    #[serde(default = "default_match_center_tolerance")]
    pub match_center_tolerance: f64,
    pub alignment: AlignmentConfig,
    /// When set, 3D detections without a 2D projection match are discarded.
    /// Models fusion-dependent pipelines whose association lives entirely in
    /// the image plane; used as the robustness baseline.
    #[serde(default)]
    pub require_2d_pairing: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            score_filter: PerClass::uniform(0.1),
            nms_iou: PerClass::uniform(0.08),
            match_iou_gate: 0.6,
            match_center_tolerance: default_match_center_tolerance(),
            alignment: AlignmentConfig::default(),
            require_2d_pairing: false,
        }
    }
}

/// Association strategy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatcherMode {
    /// Staged association: paired detections, then pure 3D, then pure 2D.
    #[default]
    Cascade,
    /// One-shot association of all 3D-capable detections.
    SingleStage,
}

/// Gates are in cost space: `cost = 1 - similarity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatcherConfig {
    #[serde(default)]
    pub mode: MatcherMode,
    #[serde(default = "default_true")]
    pub enable_pure3d_stage: bool,
    #[serde(default = "default_true")]
    pub enable_pure2d_stage: bool,
    /// Gate for the paired-detection stage (BEV GIoU cost, range [0, 2]).
    pub gate_mix: PerClass<f64>,
    /// Gate for the pure-3D stage (BEV GIoU cost).
    pub gate_pure3d: PerClass<f64>,
    /// Gate for the pure-2D / camera-only stage (2D IoU cost, range [0, 1]).
    pub gate_pure2d: PerClass<f64>,
}

fn default_true() -> bool {
    true
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            mode: MatcherMode::Cascade,
            enable_pure3d_stage: true,
            enable_pure2d_stage: true,
            gate_mix: PerClass::uniform(1.4),
            gate_pure3d: PerClass::uniform(1.4),
            // Image-plane association wants strict overlap: loose gates let
            // clutter boxes capture tracks and drag them off via the lifted
            // position update.
            gate_pure2d: PerClass::uniform(0.4),
        }
    }
}

/// Diagonal measurement covariance entries (units squared).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementVar {
    pub position: f64,
    pub dims: f64,
    pub heading: f64,
}

/// Process noise spectral densities for the constant-velocity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessNoise {
    /// White-acceleration density driving planar position/velocity.
    pub accel: f64,
    pub z: f64,
    pub dims: f64,
    pub heading: f64,
}

/// Initial state covariance diagonal for freshly spawned tracks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialVar {
    pub position: f64,
    pub dims: f64,
    pub heading: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionConfig {
    /// Noise inflation applied to camera-only position observations.
    pub gamma: PerClass<f64>,
    pub measurement_var: PerClass<MeasurementVar>,
    pub process: ProcessNoise,
    pub initial_var: InitialVar,
    /// Robust cap on lifted-position innovations (meters): larger residuals
    /// are clamped toward the prediction, bounding the damage a bad camera
    /// ray can do.
    #[serde(default = "default_lift_innovation_cap")]
    pub lift_innovation_cap: f64,
}

fn default_lift_innovation_cap() -> f64 {
    2.0
}

fn default_match_center_tolerance() -> f64 {
    1.0
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            gamma: PerClass::uniform(100.0),
            measurement_var: PerClass::uniform(MeasurementVar {
                position: 0.25,
                dims: 0.1,
                heading: 0.1,
            }),
            process: ProcessNoise { accel: 4.0, z: 0.05, dims: 0.02, heading: 0.1 },
            initial_var: InitialVar {
                position: 1.0,
                dims: 0.25,
                heading: 0.5,
                velocity: 25.0,
            },
            lift_innovation_cap: default_lift_innovation_cap(),
        }
    }
}

/// Posterior score combination rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreStrategy {
    #[default]
    NoisyOr,
    Max,
    Ema,
    Average,
}

/// Track confidence maintenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LifecycleMode {
    /// Confidence-calibrated: terminate when the online average score drops
    /// below the deletion threshold.
    #[default]
    Score,
    /// Count-based baseline: confirm after `min_hits`, kill after `max_age`
    /// consecutive misses.
    Count { min_hits: u32, max_age: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreConfig {
    /// Score decay per prediction at multi-modal frames.
    pub sigma_sync: PerClass<f64>,
    /// Score decay per prediction at camera-only frames.
    pub sigma_async: PerClass<f64>,
    /// Cross-modal fusion weight on the 3D score.
    pub alpha: PerClass<f64>,
    /// Attenuation applied to single-modality observation scores.
    pub beta: PerClass<f64>,
    /// Tracks are terminated when their average score falls below this.
    pub deletion_threshold: PerClass<f64>,
    #[serde(default)]
    pub strategy: ScoreStrategy,
    #[serde(default = "default_ema_weight")]
    pub ema_weight: f64,
    #[serde(default)]
    pub lifecycle: LifecycleMode,
}

fn default_ema_weight() -> f64 {
    0.5
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            sigma_sync: PerClass::uniform(0.7),
            // Saturated region: camera-only frames preserve historical
            // confidence rather than bleeding it off at twice the keyframe
            // rate.
            sigma_async: PerClass::uniform(1.0),
            alpha: PerClass::uniform(0.4),
            beta: PerClass::uniform(0.35),
            deletion_threshold: PerClass::uniform(0.1),
            strategy: ScoreStrategy::NoisyOr,
            ema_weight: default_ema_weight(),
            lifecycle: LifecycleMode::Score,
        }
    }
}

/// Complete tracker configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub matcher: MatcherConfig,
    #[serde(default)]
    pub motion: MotionConfig,
    #[serde(default)]
    pub score: ScoreConfig,
}

/// A named configuration problem (bad range, inconsistent setting).
#[derive(Debug, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

fn check<T: PartialOrd + std::fmt::Display + Copy>(
    name: &str,
    values: impl Iterator<Item = T>,
    lo: T,
    hi: T,
    lo_exclusive: bool,
) -> Result<(), ConfigError> {
    for v in values {
        let above = if lo_exclusive { v > lo } else { v >= lo };
        if !(above && v <= hi) {
            return Err(ConfigError(format!(
                "{name} = {v} outside {}{lo}, {hi}]",
                if lo_exclusive { "(" } else { "[" }
            )));
        }
    }
    Ok(())
}

impl TrackerConfig {
    /// Validates every range invariant; call after deserialization.
    pub fn validate(&self) -> Result<(), ConfigError> {
        check("preprocess.score_filter", self.preprocess.score_filter.values().copied(), 0.0, 1.0, false)?;
        check("preprocess.nms_iou", self.preprocess.nms_iou.values().copied(), 0.0, 1.0, false)?;
        check("preprocess.match_iou_gate", std::iter::once(self.preprocess.match_iou_gate), 0.0, 1.0, false)?;
        if self.preprocess.alignment.step <= 0.0 {
            return Err(ConfigError("preprocess.alignment.step must be positive".into()));
        }
        check("matcher.gate_mix", self.matcher.gate_mix.values().copied(), 0.0, 2.0, false)?;
        check("matcher.gate_pure3d", self.matcher.gate_pure3d.values().copied(), 0.0, 2.0, false)?;
        check("matcher.gate_pure2d", self.matcher.gate_pure2d.values().copied(), 0.0, 1.0, false)?;
        // gamma = 1 disables the differential noise treatment (baseline runs);
        // anything below 1 would overtrust camera-only observations.
        check("motion.gamma", self.motion.gamma.values().copied(), 1.0, f64::INFINITY, false)?;
        for mv in self.motion.measurement_var.values() {
            if mv.position <= 0.0 || mv.dims <= 0.0 || mv.heading <= 0.0 {
                return Err(ConfigError("motion.measurement_var entries must be positive".into()));
            }
        }
        check("score.sigma_sync", self.score.sigma_sync.values().copied(), 0.0, 1.0, true)?;
        check("score.sigma_async", self.score.sigma_async.values().copied(), 0.0, 1.0, true)?;
        check("score.alpha", self.score.alpha.values().copied(), 0.0, 1.0, false)?;
        check("score.beta", self.score.beta.values().copied(), 0.0, 1.0, true)?;
        check("score.deletion_threshold", self.score.deletion_threshold.values().copied(), 0.0, 1.0, false)?;
        check("score.ema_weight", std::iter::once(self.score.ema_weight), 0.0, 1.0, false)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_class_override_resolution() {
        let p = PerClass::uniform(1.4).with_override("pedestrian", 1.2);
        assert_eq!(*p.get("car"), 1.4);
        assert_eq!(*p.get("pedestrian"), 1.2);
    }

    #[test]
    fn default_config_validates() {
        TrackerConfig::default().validate().unwrap();
    }

    #[test]
    fn out_of_range_sigma_is_rejected() {
        let mut cfg = TrackerConfig::default();
        cfg.score.sigma_sync = PerClass::uniform(1.5);
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("sigma_sync"));
    }

    #[test]
    fn gamma_below_one_is_rejected() {
        let mut cfg = TrackerConfig::default();
        cfg.motion.gamma = PerClass::uniform(0.5);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn missing_key_error_names_the_field() {
        let err = serde_json::from_str::<TrackerConfig>(
            r#"{"score": {"sigma_sync": {"default": 0.7}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("sigma_async"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = serde_json::from_str::<TrackerConfig>(r#"{"bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = TrackerConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: TrackerConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
