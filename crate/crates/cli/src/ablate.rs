//! Configuration-matrix sweeps producing a comparative table.

use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;

use asyncmot::config::{AlignMetric, LifecycleMode, MatcherMode, PerClass, ScoreStrategy, TrackerConfig};
use asyncmot::io;
use asyncmot::metrics;
use asyncmot::sim::{self, GtFrame};
use asyncmot::tracker::{self, Frame, FrameKind};

use crate::AppError;

#[derive(Args)]
pub struct AblateArgs {
    /// Scene file with ground truth (fixed detections for every row).
    #[arg(long, conflicts_with = "scenario")]
    scene: Option<PathBuf>,
    /// Scenario config; regenerated per row (required for extrinsic-noise).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Base tracker configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated toggle dimensions to sweep. Available:
    /// async-data, cascade, pure3d-stage, pure2d-stage, lifecycle,
    /// alignment, align-metric, score-strategy, require-2d-pairing,
    /// extrinsic-noise.
    #[arg(long, value_delimiter = ',', required = true)]
    matrix: Vec<String>,
    /// Center-distance matching gate in meters.
    #[arg(long, default_value_t = 2.0)]
    dist_gate: f64,
    /// Number of recall points in the sweep.
    #[arg(long, default_value_t = 40)]
    n_thresholds: usize,
    /// Optional path for the table (also printed to stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    AsyncData,
    Cascade,
    Pure3dStage,
    Pure2dStage,
    Lifecycle,
    Alignment,
    AlignMetric,
    ScoreStrategy,
    Require2dPairing,
    ExtrinsicNoise,
}

impl Dim {
    fn parse(name: &str) -> Option<Dim> {
        match name {
            "async-data" => Some(Dim::AsyncData),
            "cascade" => Some(Dim::Cascade),
            "pure3d-stage" => Some(Dim::Pure3dStage),
            "pure2d-stage" => Some(Dim::Pure2dStage),
            "lifecycle" => Some(Dim::Lifecycle),
            "alignment" => Some(Dim::Alignment),
            "align-metric" => Some(Dim::AlignMetric),
            "score-strategy" => Some(Dim::ScoreStrategy),
            "require-2d-pairing" => Some(Dim::Require2dPairing),
            "extrinsic-noise" => Some(Dim::ExtrinsicNoise),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Dim::AsyncData => "async-data",
            Dim::Cascade => "cascade",
            Dim::Pure3dStage => "pure3d-stage",
            Dim::Pure2dStage => "pure2d-stage",
            Dim::Lifecycle => "lifecycle",
            Dim::Alignment => "alignment",
            Dim::AlignMetric => "align-metric",
            Dim::ScoreStrategy => "score-strategy",
            Dim::Require2dPairing => "require-2d-pairing",
            Dim::ExtrinsicNoise => "extrinsic-noise",
        }
    }

    /// Value labels, baseline (all-off row) first.
    fn values(&self) -> Vec<&'static str> {
        match self {
            Dim::AsyncData | Dim::Cascade | Dim::Pure3dStage | Dim::Pure2dStage
            | Dim::Alignment => vec!["off", "on"],
            Dim::Require2dPairing => vec!["off", "on"],
            Dim::Lifecycle => vec!["count", "score"],
            Dim::AlignMetric => vec!["iou", "giou", "corner"],
            Dim::ScoreStrategy => vec!["average", "ema", "max", "noisy-or"],
            Dim::ExtrinsicNoise => vec!["0.0", "0.1", "0.2", "0.3"],
        }
    }
}

/// A fully resolved run: tracker config plus input-shaping switches.
#[derive(Clone)]
struct RunSpec {
    labels: Vec<(&'static str, &'static str)>,
    cfg: TrackerConfig,
    drop_async: bool,
    extrinsic_sigma: Option<f64>,
}

fn apply(dim: Dim, value: &'static str, spec: &mut RunSpec) {
    match dim {
        Dim::AsyncData => spec.drop_async = value == "off",
        Dim::Cascade => {
            spec.cfg.matcher.mode =
                if value == "on" { MatcherMode::Cascade } else { MatcherMode::SingleStage };
        }
        Dim::Pure3dStage => spec.cfg.matcher.enable_pure3d_stage = value == "on",
        Dim::Pure2dStage => spec.cfg.matcher.enable_pure2d_stage = value == "on",
        Dim::Lifecycle => {
            if value == "count" {
                spec.cfg.score.lifecycle = LifecycleMode::Count { min_hits: 2, max_age: 2 };
                spec.cfg.motion.gamma = PerClass::uniform(1.0);
            } else {
                spec.cfg.score.lifecycle = LifecycleMode::Score;
            }
        }
        Dim::Alignment => spec.cfg.preprocess.alignment.enabled = value == "on",
        Dim::AlignMetric => {
            spec.cfg.preprocess.alignment.metric = match value {
                "giou" => AlignMetric::Giou,
                "corner" => AlignMetric::CornerDistance,
                _ => AlignMetric::Iou,
            };
        }
        Dim::ScoreStrategy => {
            spec.cfg.score.strategy = match value {
                "average" => ScoreStrategy::Average,
                "ema" => ScoreStrategy::Ema,
                "max" => ScoreStrategy::Max,
                _ => ScoreStrategy::NoisyOr,
            };
        }
        Dim::Require2dPairing => spec.cfg.preprocess.require_2d_pairing = value == "on",
        Dim::ExtrinsicNoise => {
            spec.extrinsic_sigma = Some(value.parse().expect("fixed sigma labels"));
        }
    }
}

fn cartesian(dims: &[Dim], base: &TrackerConfig) -> Vec<RunSpec> {
    let mut specs = vec![RunSpec {
        labels: Vec::new(),
        cfg: base.clone(),
        drop_async: false,
        extrinsic_sigma: None,
    }];
    for &dim in dims {
        let mut next = Vec::with_capacity(specs.len() * dim.values().len());
        for spec in &specs {
            for value in dim.values() {
                let mut s = spec.clone();
                s.labels.push((dim.name(), value));
                apply(dim, value, &mut s);
                next.push(s);
            }
        }
        specs = next;
    }
    specs
}

enum Input {
    Scene { frames: Vec<Frame>, gt: Vec<GtFrame> },
    Scenario(sim::ScenarioConfig),
}

fn evaluate(
    spec: &RunSpec,
    input: &Input,
    dist_gate: f64,
    n_thresholds: usize,
) -> Result<metrics::EvalReport, AppError> {
    let (frames, gt_sync) = match input {
        Input::Scene { frames, gt } => (frames.clone(), gt.clone()),
        Input::Scenario(scenario) => {
            let mut s = scenario.clone();
            if let Some(sigma) = spec.extrinsic_sigma {
                s.extrinsic_sigma = sigma;
            }
            let (frames, gt) = sim::generate(&s).map_err(|e| AppError::Data(e.to_string()))?;
            (frames, gt.sync_frames())
        }
    };
    let frames = if spec.drop_async { tracker::sync_only(&frames) } else { frames };
    let snapshots = tracker::run_scene(&frames, &spec.cfg)?;
    let pred: Vec<_> = snapshots.into_iter().filter(|s| s.kind == FrameKind::Sync).collect();
    Ok(metrics::amota(&pred, &gt_sync, dist_gate, n_thresholds)?)
}

pub fn run(args: &AblateArgs) -> Result<(), AppError> {
    let mut dims = Vec::new();
    for name in &args.matrix {
        let dim = Dim::parse(name)
            .ok_or_else(|| AppError::Data(format!("unknown matrix dimension `{name}`")))?;
        if !dims.contains(&dim) {
            dims.push(dim);
        }
    }
    let base_cfg = crate::load_config(&args.config)?;

    let input = match (&args.scene, &args.scenario) {
        (Some(path), None) => {
            if dims.contains(&Dim::ExtrinsicNoise) {
                return Err(AppError::Data(
                    "extrinsic-noise sweeps need --scenario (scenes have fixed detections)".into(),
                ));
            }
            let scene = io::load_scene(path)?;
            let gt = scene.ground_truth.ok_or_else(|| {
                AppError::Data(format!("{}: no ground-truth records", path.display()))
            })?;
            Input::Scene { frames: scene.frames, gt: gt.sync_frames() }
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
            let scenario: sim::ScenarioConfig = serde_json::from_str(&text)
                .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
            scenario.validate().map_err(|e| AppError::Data(e.to_string()))?;
            Input::Scenario(scenario)
        }
        _ => {
            return Err(AppError::Data(
                "exactly one of --scene or --scenario is required".into(),
            ));
        }
    };

    let specs = cartesian(&dims, &base_cfg);
    let reports: Vec<Result<metrics::EvalReport, AppError>> = specs
        .par_iter()
        .map(|spec| evaluate(spec, &input, args.dist_gate, args.n_thresholds))
        .collect();

    let mut table = String::new();
    table.push_str(&format!("{:<5}", "row"));
    for dim in &dims {
        table.push_str(&format!(" {:<12}", dim.name()));
    }
    table.push_str(&format!(
        " {:>7} {:>7} {:>7} {:>6} {:>6} {:>6}\n",
        "AMOTA", "AMOTP", "MOTA", "IDS", "FP", "FN"
    ));
    for (i, (spec, report)) in specs.iter().zip(&reports).enumerate() {
        let report = match report {
            Ok(r) => r,
            Err(e) => return Err(AppError::Data(e.message().to_string())),
        };
        table.push_str(&format!("{:<5}", i));
        for (_, value) in &spec.labels {
            table.push_str(&format!(" {:<12}", value));
        }
        table.push_str(&format!(
            " {:>7.3} {:>7.3} {:>7.3} {:>6} {:>6} {:>6}\n",
            report.amota,
            report.amotp,
            report.mota,
            report.ids,
            report.fp,
            report.false_negatives
        ));
    }
    print!("{table}");
    if let Some(path) = &args.output {
        std::fs::write(path, &table)?;
        println!("table written to {}", path.display());
    }
    Ok(())
}
