//! Command-line entry points: track, eval, simulate, ablate.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error,
//! 3 numerical fault.

mod ablate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use asyncmot::config::TrackerConfig;
use asyncmot::io;
use asyncmot::metrics;
use asyncmot::sim;
use asyncmot::tracker::{self, FrameKind, TrackError, TrackSnapshot};

#[derive(Parser)]
#[command(
    name = "asyncmot",
    version,
    about = "LiDAR-camera 3D multi-object tracking with asynchronous camera updates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tracker over a scene file and write a track dump.
    Track(TrackArgs),
    /// Evaluate a track dump against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic scene from a scenario config.
    Simulate(SimulateArgs),
    /// Run a matrix of configuration toggles and tabulate the results.
    Ablate(ablate::AblateArgs),
}

#[derive(Args)]
struct TrackArgs {
    /// Scene file (line-delimited records).
    #[arg(long)]
    scene: PathBuf,
    /// Tracker configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output track dump path.
    #[arg(long)]
    output: PathBuf,
    /// Drop camera-only frames before tracking.
    #[arg(long)]
    sync_only: bool,
    /// Include camera-only frame snapshots in the dump (default: keyframes only).
    #[arg(long)]
    emit_async_snapshots: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Track dump produced by `track`.
    #[arg(long)]
    tracks: PathBuf,
    /// Scene file containing ground-truth records.
    #[arg(long)]
    gt: PathBuf,
    /// Center-distance matching gate in meters.
    #[arg(long, default_value_t = 2.0)]
    dist_gate: f64,
    /// Number of recall points in the sweep.
    #[arg(long, default_value_t = 40)]
    n_thresholds: usize,
    /// Evaluate at every ground-truth timestamp instead of keyframes only.
    #[arg(long)]
    full_rate: bool,
    /// Report output path (JSON).
    #[arg(long, default_value = "report.json")]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output scene path.
    #[arg(long)]
    output: PathBuf,
}

/// Failure categories mapped to exit codes.
pub enum AppError {
    Data(String),
    Numerical(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Data(_) => 2,
            AppError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Data(m) | AppError::Numerical(m) => m,
        }
    }
}

impl From<io::IoError> for AppError {
    fn from(e: io::IoError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<metrics::EvalError> for AppError {
    fn from(e: metrics::EvalError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<TrackError> for AppError {
    fn from(e: TrackError) -> Self {
        match e {
            TrackError::Estimation(asyncmot::estimation::EstimationError::Numerical(_)) => {
                AppError::Numerical(e.to_string())
            }
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

fn load_config(path: &PathBuf) -> Result<TrackerConfig, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let cfg: TrackerConfig = serde_json::from_str(&text)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    cfg.validate().map_err(|e| AppError::Data(e.to_string()))?;
    Ok(cfg)
}

fn cmd_track(args: &TrackArgs) -> Result<(), AppError> {
    let scene = io::load_scene(&args.scene)?;
    let cfg = load_config(&args.config)?;
    let frames = if args.sync_only {
        tracker::sync_only(&scene.frames)
    } else {
        scene.frames.clone()
    };
    let snapshots = tracker::run_scene(&frames, &cfg)?;
    let emitted: Vec<TrackSnapshot> = snapshots
        .into_iter()
        .filter(|s| args.emit_async_snapshots || s.kind == FrameKind::Sync)
        .collect();
    io::save_tracks(&emitted, &args.output)?;
    let n_tracks: usize = emitted.iter().map(|s| s.entries.len()).sum();
    println!(
        "tracked {} frames -> {} snapshot records ({})",
        frames.len(),
        n_tracks,
        args.output.display()
    );
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), AppError> {
    let pred = io::load_tracks(&args.tracks)?;
    let scene = io::load_scene(&args.gt)?;
    let gt = scene
        .ground_truth
        .ok_or_else(|| AppError::Data(format!("{}: no ground-truth records", args.gt.display())))?;
    let (pred, gt_frames): (Vec<TrackSnapshot>, Vec<sim::GtFrame>) = if args.full_rate {
        (pred, gt.frames)
    } else {
        (
            pred.into_iter().filter(|s| s.kind == FrameKind::Sync).collect(),
            gt.sync_frames(),
        )
    };
    let report = metrics::amota(&pred, &gt_frames, args.dist_gate, args.n_thresholds)?;
    print!("{}", metrics::format_report(&report));
    let json = serde_json::to_string_pretty(&report).expect("report serialization");
    std::fs::write(&args.output, json)?;
    println!("report written to {}", args.output.display());
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), AppError> {
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| AppError::Data(format!("{}: {e}", args.scenario.display())))?;
    let mut scenario: sim::ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| AppError::Data(format!("{}: {e}", args.scenario.display())))?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let (frames, gt) = sim::generate(&scenario).map_err(|e| AppError::Data(e.to_string()))?;
    let scene = io::SceneFile {
        scene_id: format!("sim-{}", scenario.seed),
        cameras: scenario.cameras.clone(),
        frames,
        ground_truth: Some(gt),
    };
    io::save_scene(&scene, &args.output)?;
    println!(
        "generated {} frames over {:.1}s ({} objects) -> {}",
        scene.frames.len(),
        scenario.duration,
        scenario.objects.len(),
        args.output.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes; everything else is usage.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Track(args) => cmd_track(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Ablate(args) => ablate::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
