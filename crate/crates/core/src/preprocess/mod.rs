//! Per-frame detection hygiene and cross-modal pairing.
//!
//! Sync frames run score filtering, BEV non-maximum suppression, projection
//! based 3D-2D matching and (optionally) image alignment of the paired 3D
//! boxes. Async frames pass their camera detections straight through.

pub mod align;

pub use align::{align_mix_detection, align_mix_detection_report, AlignReport};

use std::collections::BTreeMap;

use crate::assignment::{solve_assignment, CostMatrix};
use crate::config::{PerClass, PreprocessConfig};
use crate::geometry::{best_camera_match, iou_2d, bev_iou_3d, Box2D, Box3D, CameraId, CameraModel};
use crate::scalar::{real, Real};

/// A 3D detection in the global frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection3D<S = f64> {
    pub box3d: Box3D<S>,
    pub score: S,
    pub class: String,
    pub t: f64,
}

/// A 2D detection in a specific camera.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection2D<S = f64> {
    pub box2d: Box2D<S>,
    pub score: S,
    pub class: String,
    pub camera: CameraId,
    pub t: f64,
}

/// A cross-modal pair: a 3D detection matched to a 2D detection of the same
/// class via projection overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct MixDetection<S = f64> {
    pub det3d: Detection3D<S>,
    pub det2d: Detection2D<S>,
    pub camera: CameraId,
    pub match_iou: S,
}

/// Preprocessing result; the sync sets partition the filtered inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum PreprocessOutput<S = f64> {
    Sync {
        mix: Vec<MixDetection<S>>,
        pure3d: Vec<Detection3D<S>>,
        pure2d: Vec<Detection2D<S>>,
    },
    Async {
        single2d: Vec<Detection2D<S>>,
    },
}

/// Retains detections whose score reaches the per-class threshold.
pub fn score_filter<S: Real>(
    dets: Vec<Detection3D<S>>,
    thresholds: &PerClass<f64>,
) -> Vec<Detection3D<S>> {
    dets.into_iter()
        .filter(|d| d.score >= real::<S>(*thresholds.get(&d.class)))
        .collect()
}

/// Greedy score-descending suppression within each class using BEV IoU.
///
/// Survivors have pairwise same-class BEV IoU below the class threshold.
pub fn nms_3d<S: Real>(
    dets: Vec<Detection3D<S>>,
    iou_thresh: &PerClass<f64>,
) -> Vec<Detection3D<S>> {
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, d) in dets.iter().enumerate() {
        by_class.entry(d.class.as_str()).or_default().push(i);
    }
    let mut keep = vec![false; dets.len()];
    for (class, mut idxs) in by_class {
        let thresh = real::<S>(*iou_thresh.get(class));
        idxs.sort_by(|&a, &b| {
            dets[b]
                .score
                .partial_cmp(&dets[a].score)
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut kept_in_class: Vec<usize> = Vec::new();
        for &i in &idxs {
            let suppressed = kept_in_class
                .iter()
                .any(|&k| bev_iou_3d(&dets[i].box3d, &dets[k].box3d) >= thresh);
            if !suppressed {
                kept_in_class.push(i);
                keep[i] = true;
            }
        }
    }
    dets.into_iter()
        .enumerate()
        .filter_map(|(i, d)| keep[i].then_some(d))
        .collect()
}

/// Pairs 3D detections with 2D detections via projection overlap.
///
/// Each 3D detection projects into the camera with the largest visible area;
/// per camera and class, a one-to-one assignment maximizes overlap. A pair
/// is admissible when its IoU exceeds `iou_gate` and the projected-center
/// offset, scaled back to meters at the detection's range, stays within
/// `center_tolerance`; admissible assigned pairs become [`MixDetection`]s
/// and leftovers split into the pure sets.
pub fn match_3d_2d<S: Real>(
    d3: Vec<Detection3D<S>>,
    d2: Vec<Detection2D<S>>,
    cams: &[CameraModel<S>],
    iou_gate: f64,
    center_tolerance: f64,
) -> (Vec<MixDetection<S>>, Vec<Detection3D<S>>, Vec<Detection2D<S>>) {
    let gate = real::<S>(iou_gate);
    let tol = real::<S>(center_tolerance);
    // Best visible camera per 3D detection.
    let projections: Vec<Option<(CameraId, Box2D<S>)>> = d3
        .iter()
        .map(|d| best_camera_match(&d.box3d, cams).map(|(id, r)| (id.clone(), r)))
        .collect();

    // Group rows (3D) and cols (2D) by camera and class.
    let mut groups: BTreeMap<(CameraId, &str), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, proj) in projections.iter().enumerate() {
        if let Some((cam, _)) = proj {
            groups
                .entry((cam.clone(), d3[i].class.as_str()))
                .or_default()
                .0
                .push(i);
        }
    }
    for (j, det) in d2.iter().enumerate() {
        groups
            .entry((det.camera.clone(), det.class.as_str()))
            .or_default()
            .1
            .push(j);
    }

    let mut matched: Vec<Option<(usize, S)>> = vec![None; d3.len()]; // 3D idx -> (2D idx, iou)
    let mut used2d = vec![false; d2.len()];
    for ((cam_id, _class), (rows, cols)) in groups {
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        let cam = cams.iter().find(|c| c.id == cam_id);
        let costs = CostMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let d3_idx = rows[r];
            let rect = &projections[d3_idx].as_ref().unwrap().1;
            let det = &d2[cols[c]];
            let iou = iou_2d(rect, &det.box2d);
            if iou <= gate {
                return None;
            }
            if let Some(cam) = cam {
                let range = d3[d3_idx].box3d.center().sub(&cam.center_global()).norm();
                let [pu, pv] = rect.center();
                let [du, dv] = det.box2d.center();
                let offset_px = ((pu - du) * (pu - du) + (pv - dv) * (pv - dv)).sqrt();
                let fx = cam.intrinsics[0][0];
                if offset_px * range / fx > tol {
                    return None;
                }
            }
            Some(S::one() - iou)
        });
        let result = solve_assignment(&costs, S::one());
        for p in result.pairs {
            matched[rows[p.row]] = Some((cols[p.col], S::one() - p.cost));
            used2d[cols[p.col]] = true;
        }
    }

    let mut mix = Vec::new();
    let mut pure3d = Vec::new();
    for (i, det) in d3.into_iter().enumerate() {
        match matched[i] {
            Some((j, iou)) => {
                let det2d = d2[j].clone();
                let camera = det2d.camera.clone();
                mix.push(MixDetection { det3d: det, det2d, camera, match_iou: iou });
            }
            None => pure3d.push(det),
        }
    }
    let pure2d = d2
        .into_iter()
        .enumerate()
        .filter_map(|(j, d)| (!used2d[j]).then_some(d))
        .collect();
    (mix, pure3d, pure2d)
}

/// Full sync-frame preprocessing: filter, suppress, pair and align.
pub fn preprocess_sync<S: Real>(
    d3: Vec<Detection3D<S>>,
    d2: Vec<Detection2D<S>>,
    cams: &[CameraModel<S>],
    cfg: &PreprocessConfig,
) -> PreprocessOutput<S> {
    let filtered = score_filter(d3, &cfg.score_filter);
    let suppressed = nms_3d(filtered, &cfg.nms_iou);
    let (mut mix, pure3d, pure2d) =
        match_3d_2d(suppressed, d2, cams, cfg.match_iou_gate, cfg.match_center_tolerance);
    if cfg.alignment.enabled {
        for m in &mut mix {
            if let Some(cam) = cams.iter().find(|c| c.id == m.camera) {
                m.det3d = align_mix_detection(m, cam, &cfg.alignment);
            }
        }
    }
    let pure3d = if cfg.require_2d_pairing { Vec::new() } else { pure3d };
    PreprocessOutput::Sync { mix, pure3d, pure2d }
}

/// Async-frame preprocessing: camera detections pass through untouched.
pub fn preprocess_async<S: Real>(d2: Vec<Detection2D<S>>) -> PreprocessOutput<S> {
    PreprocessOutput::Async { single2d: d2 }
}
