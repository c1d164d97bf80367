//! Learning-free 3D multi-object tracking that fuses synchronous LiDAR
//! detections with higher-frequency asynchronous camera detections.
//!
//! The pipeline per frame: predict tracks forward, preprocess detections
//! (filter, suppress, pair 3D with 2D, refine paired boxes against the
//! image), associate through a frequency-aware cascade, update motion with
//! modality-scaled noise and confidence with Noisy-OR lifecycle management.
//! A scenario simulator and a CLEAR-MOT / recall-averaged-MOTA evaluator
//! support desk-scale verification.
//!
//! The numeric core (`geometry`, `assignment`, `preprocess`, `matching`,
//! `estimation`) is generic over the scalar type through [`scalar::Real`];
//! the pipeline layers (`tracker`, `sim`, `metrics`, `io`) instantiate it at
//! `f64`, which is also the default type parameter everywhere.

pub mod assignment;
pub mod config;
pub mod estimation;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod matching;
pub mod metrics;
pub mod preprocess;
pub mod scalar;
pub mod sim;
pub mod tracker;

pub use scalar::{real, Real};

/// Working scalar of the concrete pipeline.
pub type Scalar = f64;

// Concrete `f64` instantiations of the generic core types.
pub type Box2D = geometry::Box2D<Scalar>;
pub type Box3D = geometry::Box3D<Scalar>;
pub type CameraModel = geometry::CameraModel<Scalar>;
pub type CostMatrix = assignment::CostMatrix<Scalar>;
pub type Detection2D = preprocess::Detection2D<Scalar>;
pub type Detection3D = preprocess::Detection3D<Scalar>;
pub type MixDetection = preprocess::MixDetection<Scalar>;
pub type Track = estimation::Track<Scalar>;

pub use config::TrackerConfig;
pub use io::SceneFile;
pub use metrics::EvalReport;
pub use sim::{GroundTruth, ScenarioConfig};
pub use tracker::{run_scene, Frame, FrameKind, TrackSnapshot, Tracker};
