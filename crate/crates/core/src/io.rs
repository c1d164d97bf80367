//! Line-delimited interchange formats for scenes, ground truth and track
//! dumps.
//!
//! Files are newline-delimited JSON: one record per line, each carrying a
//! `record` tag (`header`, `frame`, `ground_truth`, `track`). The header
//! comes first and pins the format version and camera rig. Parsing is
//! strict: unknown fields, bad ranges and ordering violations are rejected
//! with the offending line number.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::estimation::TrackStatus;
use crate::geometry::{Box2D, Box3D, CameraModel};
use crate::preprocess::{Detection2D, Detection3D};
use crate::sim::{GroundTruth, GtFrame, GtObject};
use crate::tracker::{Frame, FrameKind, SnapshotEntry, TrackSnapshot};

pub const FORMAT_VERSION: u32 = 1;

/// A complete scene: rig, frames and optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub scene_id: String,
    pub cameras: Vec<CameraModel>,
    pub frames: Vec<Frame>,
    pub ground_truth: Option<GroundTruth>,
}

/// File-format failures, with line positions where applicable.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> IoError {
    IoError::Malformed {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderRecord {
    version: u32,
    #[serde(default)]
    scene_id: String,
    #[serde(default)]
    cameras: Vec<CameraModel>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Det3Record {
    x: f64,
    y: f64,
    z: f64,
    w: f64,
    l: f64,
    h: f64,
    heading: f64,
    score: f64,
    class: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Det2Record {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    score: f64,
    class: String,
    camera: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    t: f64,
    kind: FrameKind,
    #[serde(default)]
    detections_3d: Vec<Det3Record>,
    #[serde(default)]
    detections_2d: Vec<Det2Record>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GtObjectRecord {
    id: u64,
    class: String,
    x: f64,
    y: f64,
    z: f64,
    w: f64,
    l: f64,
    h: f64,
    heading: f64,
    vx: f64,
    vy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GtRecord {
    t: f64,
    kind: FrameKind,
    objects: Vec<GtObjectRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackRecord {
    t: f64,
    kind: FrameKind,
    id: u64,
    class: String,
    x: f64,
    y: f64,
    z: f64,
    w: f64,
    l: f64,
    h: f64,
    heading: f64,
    vx: f64,
    vy: f64,
    score: f64,
    status: TrackStatus,
}

fn check_score(path: &Path, line: usize, score: f64) -> Result<(), IoError> {
    if !(0.0..=1.0).contains(&score) {
        return Err(malformed(path, line, format!("field `score` = {score} outside [0, 1]")));
    }
    Ok(())
}

fn check_dims(path: &Path, line: usize, w: f64, l: f64, h: f64) -> Result<(), IoError> {
    for (name, v) in [("w", w), ("l", l), ("h", h)] {
        if v <= 0.0 || v.is_nan() {
            return Err(malformed(path, line, format!("field `{name}` = {v} must be positive")));
        }
    }
    Ok(())
}

fn write_record<T: Serialize>(
    out: &mut impl Write,
    record: &str,
    body: &T,
) -> Result<(), IoError> {
    let mut map = match serde_json::to_value(body).expect("record serialization") {
        Value::Object(m) => m,
        _ => unreachable!("records serialize to objects"),
    };
    let mut line = Map::new();
    line.insert("record".to_string(), Value::String(record.to_string()));
    line.append(&mut map);
    let text = serde_json::to_string(&Value::Object(line)).expect("record serialization");
    writeln!(out, "{text}")?;
    Ok(())
}

/// Writes a scene (and its ground truth when present) to `path`.
/// Output bytes are deterministic for identical inputs.
pub fn save_scene(scene: &SceneFile, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    write_record(
        &mut out,
        "header",
        &HeaderRecord {
            version: FORMAT_VERSION,
            scene_id: scene.scene_id.clone(),
            cameras: scene.cameras.clone(),
        },
    )?;
    for frame in &scene.frames {
        write_record(
            &mut out,
            "frame",
            &FrameRecord {
                t: frame.t,
                kind: frame.kind,
                detections_3d: frame
                    .dets3d
                    .iter()
                    .map(|d| Det3Record {
                        x: d.box3d.x,
                        y: d.box3d.y,
                        z: d.box3d.z,
                        w: d.box3d.w,
                        l: d.box3d.l,
                        h: d.box3d.h,
                        heading: d.box3d.heading,
                        score: d.score,
                        class: d.class.clone(),
                    })
                    .collect(),
                detections_2d: frame
                    .dets2d
                    .iter()
                    .map(|d| Det2Record {
                        x1: d.box2d.x1,
                        y1: d.box2d.y1,
                        x2: d.box2d.x2,
                        y2: d.box2d.y2,
                        score: d.score,
                        class: d.class.clone(),
                        camera: d.camera.clone(),
                    })
                    .collect(),
            },
        )?;
    }
    if let Some(gt) = &scene.ground_truth {
        for frame in &gt.frames {
            write_record(
                &mut out,
                "ground_truth",
                &GtRecord {
                    t: frame.t,
                    kind: frame.kind,
                    objects: frame
                        .objects
                        .iter()
                        .map(|o| GtObjectRecord {
                            id: o.id,
                            class: o.class.clone(),
                            x: o.box3d.x,
                            y: o.box3d.y,
                            z: o.box3d.z,
                            w: o.box3d.w,
                            l: o.box3d.l,
                            h: o.box3d.h,
                            heading: o.box3d.heading,
                            vx: o.vx,
                            vy: o.vy,
                        })
                        .collect(),
                },
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_line(
    path: &Path,
    line_no: usize,
    line: &str,
) -> Result<(String, Map<String, Value>), IoError> {
    let mut map: Map<String, Value> = serde_json::from_str(line)
        .map_err(|e| malformed(path, line_no, format!("invalid JSON: {e}")))?;
    let record = map
        .remove("record")
        .and_then(|v| v.as_str().map(|s| s.to_string()))
        .ok_or_else(|| malformed(path, line_no, "missing `record` tag"))?;
    Ok((record, map))
}

fn from_map<T: for<'de> Deserialize<'de>>(
    path: &Path,
    line_no: usize,
    map: Map<String, Value>,
) -> Result<T, IoError> {
    serde_json::from_value(Value::Object(map))
        .map_err(|e| malformed(path, line_no, e.to_string()))
}

/// Loads a scene file: frames ordered by timestamp plus optional ground
/// truth. All type invariants are validated.
pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneFile, IoError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut header: Option<HeaderRecord> = None;
    let mut frames: Vec<Frame> = Vec::new();
    let mut gt_frames: Vec<GtFrame> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (record, map) = parse_line(path, line_no, &line)?;
        match record.as_str() {
            "header" => {
                let h: HeaderRecord = from_map(path, line_no, map)?;
                if h.version != FORMAT_VERSION {
                    return Err(malformed(
                        path,
                        line_no,
                        format!("unsupported format version {}", h.version),
                    ));
                }
                for cam in &h.cameras {
                    cam.validate().map_err(|e| malformed(path, line_no, e.to_string()))?;
                }
                header = Some(h);
            }
            "frame" => {
                let h = header
                    .as_ref()
                    .ok_or_else(|| malformed(path, line_no, "frame before header"))?;
                let rec: FrameRecord = from_map(path, line_no, map)?;
                if let Some(last) = frames.last() {
                    if rec.t <= last.t {
                        return Err(malformed(
                            path,
                            line_no,
                            format!("non-monotone timestamp {} after {}", rec.t, last.t),
                        ));
                    }
                }
                if rec.kind == FrameKind::Async && !rec.detections_3d.is_empty() {
                    return Err(malformed(path, line_no, "async frame carries 3D detections"));
                }
                let mut dets3d = Vec::with_capacity(rec.detections_3d.len());
                for d in rec.detections_3d {
                    check_score(path, line_no, d.score)?;
                    check_dims(path, line_no, d.w, d.l, d.h)?;
                    dets3d.push(Detection3D {
                        box3d: Box3D::new(d.x, d.y, d.z, d.w, d.l, d.h, d.heading),
                        score: d.score,
                        class: d.class,
                        t: rec.t,
                    });
                }
                let mut dets2d = Vec::with_capacity(rec.detections_2d.len());
                for d in rec.detections_2d {
                    check_score(path, line_no, d.score)?;
                    if d.x2 < d.x1 || d.y2 < d.y1 {
                        return Err(malformed(path, line_no, "degenerate 2D box corners"));
                    }
                    dets2d.push(Detection2D {
                        box2d: Box2D::new(d.x1, d.y1, d.x2, d.y2),
                        score: d.score,
                        class: d.class,
                        camera: d.camera,
                        t: rec.t,
                    });
                }
                frames.push(Frame {
                    t: rec.t,
                    kind: rec.kind,
                    dets3d,
                    dets2d,
                    cameras: h.cameras.clone(),
                });
            }
            "ground_truth" => {
                let rec: GtRecord = from_map(path, line_no, map)?;
                if let Some(last) = gt_frames.last() {
                    if rec.t <= last.t {
                        return Err(malformed(
                            path,
                            line_no,
                            format!("non-monotone ground-truth timestamp {}", rec.t),
                        ));
                    }
                }
                let mut objects = Vec::with_capacity(rec.objects.len());
                for o in rec.objects {
                    check_dims(path, line_no, o.w, o.l, o.h)?;
                    objects.push(GtObject {
                        id: o.id,
                        class: o.class,
                        box3d: Box3D::new(o.x, o.y, o.z, o.w, o.l, o.h, o.heading),
                        vx: o.vx,
                        vy: o.vy,
                    });
                }
                gt_frames.push(GtFrame { t: rec.t, kind: rec.kind, objects });
            }
            other => {
                return Err(malformed(path, line_no, format!("unknown record type `{other}`")));
            }
        }
    }

    let header = header.ok_or_else(|| malformed(path, 1, "missing header record"))?;
    Ok(SceneFile {
        scene_id: header.scene_id,
        cameras: header.cameras,
        frames,
        ground_truth: (!gt_frames.is_empty()).then_some(GroundTruth { frames: gt_frames }),
    })
}

/// Writes track snapshots: one record per (timestamp, track), ordered by
/// timestamp then identity. Deterministic bytes for identical inputs.
pub fn save_tracks(snapshots: &[TrackSnapshot], path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    write_record(
        &mut out,
        "header",
        &HeaderRecord { version: FORMAT_VERSION, scene_id: String::new(), cameras: Vec::new() },
    )?;
    for snap in snapshots {
        for e in &snap.entries {
            write_record(
                &mut out,
                "track",
                &TrackRecord {
                    t: snap.t,
                    kind: snap.kind,
                    id: e.id,
                    class: e.class.clone(),
                    x: e.box3d.x,
                    y: e.box3d.y,
                    z: e.box3d.z,
                    w: e.box3d.w,
                    l: e.box3d.l,
                    h: e.box3d.h,
                    heading: e.box3d.heading,
                    vx: e.vx,
                    vy: e.vy,
                    score: e.score,
                    status: e.status,
                },
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Loads a track dump back into per-timestamp snapshots.
pub fn load_tracks(path: impl AsRef<Path>) -> Result<Vec<TrackSnapshot>, IoError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut snapshots: Vec<TrackSnapshot> = Vec::new();
    let mut seen_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (record, map) = parse_line(path, line_no, &line)?;
        match record.as_str() {
            "header" => {
                let h: HeaderRecord = from_map(path, line_no, map)?;
                if h.version != FORMAT_VERSION {
                    return Err(malformed(
                        path,
                        line_no,
                        format!("unsupported format version {}", h.version),
                    ));
                }
                seen_header = true;
            }
            "track" => {
                if !seen_header {
                    return Err(malformed(path, line_no, "track record before header"));
                }
                let rec: TrackRecord = from_map(path, line_no, map)?;
                check_score(path, line_no, rec.score)?;
                check_dims(path, line_no, rec.w, rec.l, rec.h)?;
                let entry = SnapshotEntry {
                    id: rec.id,
                    class: rec.class,
                    box3d: Box3D::new(rec.x, rec.y, rec.z, rec.w, rec.l, rec.h, rec.heading),
                    vx: rec.vx,
                    vy: rec.vy,
                    score: rec.score,
                    status: rec.status,
                };
                match snapshots.last_mut() {
                    Some(last) if last.t == rec.t => {
                        if last.entries.last().map(|e| e.id >= rec.id).unwrap_or(false) {
                            return Err(malformed(path, line_no, "track ids out of order"));
                        }
                        last.entries.push(entry);
                    }
                    Some(last) if rec.t < last.t => {
                        return Err(malformed(path, line_no, "track timestamps out of order"));
                    }
                    _ => snapshots.push(TrackSnapshot {
                        t: rec.t,
                        kind: rec.kind,
                        entries: vec![entry],
                    }),
                }
            }
            other => {
                return Err(malformed(path, line_no, format!("unknown record type `{other}`")));
            }
        }
    }
    Ok(snapshots)
}
