//! Cascade association between predicted tracks and preprocessed detections.
//!
//! Multi-modal frames run up to three class-gated stages: paired detections
//! first (most reliable), then pure 3D, then pure 2D in the image plane.
//! Camera-only frames reuse the image-plane stage for every track. Class
//! gating is hard: costs are only formed within one class.

use std::collections::BTreeMap;

use crate::assignment::{solve_assignment, CostMatrix};
use crate::config::{MatcherConfig, MatcherMode, PerClass};
use crate::geometry::{bev_giou_3d, iou_2d, project_box, Box2D, Box3D, CameraModel};
use crate::preprocess::{Detection2D, Detection3D, MixDetection, PreprocessOutput};
use crate::scalar::{real, Real};

/// Minimal view of a predicted track used for association.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackCandidate<S = f64> {
    pub class: String,
    pub box3d: Box3D<S>,
}

/// Association outcome; track references are indices into the input slice.
/// Sync results never carry async pairs and vice versa.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult<S = f64> {
    pub mix_pairs: Vec<(usize, MixDetection<S>)>,
    pub pure3d_pairs: Vec<(usize, Detection3D<S>)>,
    pub pure2d_pairs: Vec<(usize, Detection2D<S>)>,
    pub async_pairs: Vec<(usize, Detection2D<S>)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_mix: Vec<MixDetection<S>>,
    pub unmatched_pure3d: Vec<Detection3D<S>>,
    pub unmatched_pure2d: Vec<Detection2D<S>>,
}

/// One class-gated 3D association stage on BEV generalized IoU.
///
/// Returns `(pairs, unmatched_track_idxs, unmatched_dets)`.
fn associate_stage_3d<S: Real, D>(
    tracks: &[TrackCandidate<S>],
    track_idxs: &[usize],
    dets: Vec<D>,
    det_box: impl Fn(&D) -> &Box3D<S>,
    det_class: impl Fn(&D) -> &str,
    gate: &PerClass<f64>,
) -> (Vec<(usize, D)>, Vec<usize>, Vec<D>) {
    let mut groups: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (slot, &ti) in track_idxs.iter().enumerate() {
        groups.entry(tracks[ti].class.as_str()).or_default().0.push(slot);
    }
    // Detections of classes without any track stay out of every group and
    // fall straight through as unmatched.
    let det_classes: Vec<String> = dets.iter().map(|d| det_class(d).to_string()).collect();
    let mut det_opt: Vec<Option<D>> = dets.into_iter().map(Some).collect();
    for (j, class) in det_classes.iter().enumerate() {
        if let Some(entry) = groups.get_mut(class.as_str()) {
            entry.1.push(j);
        }
    }

    let mut pairs: Vec<(usize, D)> = Vec::new();
    let mut matched_track = vec![false; track_idxs.len()];
    for (class, (rows, cols)) in groups {
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        let g = real::<S>(*gate.get(class));
        let costs = CostMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let t = &tracks[track_idxs[rows[r]]];
            let d = det_opt[cols[c]].as_ref().unwrap();
            Some(S::one() - bev_giou_3d(&t.box3d, det_box(d)))
        });
        let result = solve_assignment(&costs, g);
        for p in result.pairs {
            let slot = rows[p.row];
            matched_track[slot] = true;
            let det = det_opt[cols[p.col]].take().unwrap();
            pairs.push((track_idxs[slot], det));
        }
    }
    let unmatched_tracks: Vec<usize> = track_idxs
        .iter()
        .enumerate()
        .filter_map(|(slot, &ti)| (!matched_track[slot]).then_some(ti))
        .collect();
    let unmatched_dets: Vec<D> = det_opt.into_iter().flatten().collect();
    pairs.sort_by_key(|(ti, _)| *ti);
    (pairs, unmatched_tracks, unmatched_dets)
}

/// One class-gated image-plane stage: each cost is the 2D IoU between the
/// track's projection in the detection's own camera and the detection box.
/// Invisible tracks have zero overlap and can never match.
fn associate_stage_2d<S: Real>(
    tracks: &[TrackCandidate<S>],
    track_idxs: &[usize],
    dets: Vec<Detection2D<S>>,
    cams: &[CameraModel<S>],
    gate: &PerClass<f64>,
) -> (Vec<(usize, Detection2D<S>)>, Vec<usize>, Vec<Detection2D<S>>) {
    let mut groups: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (slot, &ti) in track_idxs.iter().enumerate() {
        groups.entry(tracks[ti].class.as_str()).or_default().0.push(slot);
    }
    let classes: Vec<String> = dets.iter().map(|d| d.class.clone()).collect();
    for (j, class) in classes.iter().enumerate() {
        if let Some(entry) = groups.get_mut(class.as_str()) {
            entry.1.push(j);
        }
    }

    // Projection cache per (track slot, camera id).
    let mut proj_cache: BTreeMap<(usize, String), Option<Box2D<S>>> = BTreeMap::new();
    let mut det_opt: Vec<Option<Detection2D<S>>> = dets.into_iter().map(Some).collect();
    let mut pairs = Vec::new();
    let mut matched_track = vec![false; track_idxs.len()];
    for (class, (rows, cols)) in groups {
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        let g = real::<S>(*gate.get(class));
        let costs = CostMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let slot = rows[r];
            let det = det_opt[cols[c]].as_ref().unwrap();
            let key = (slot, det.camera.clone());
            let proj = *proj_cache.entry(key).or_insert_with(|| {
                cams.iter()
                    .find(|cam| cam.id == det.camera)
                    .and_then(|cam| project_box(&tracks[track_idxs[slot]].box3d, cam))
            });
            let iou = match proj {
                Some(rect) => iou_2d(&rect, &det.box2d),
                None => S::zero(),
            };
            (iou > S::zero()).then(|| S::one() - iou)
        });
        let result = solve_assignment(&costs, g);
        for p in result.pairs {
            let slot = rows[p.row];
            matched_track[slot] = true;
            let det = det_opt[cols[p.col]].take().unwrap();
            pairs.push((track_idxs[slot], det));
        }
    }
    let unmatched_tracks: Vec<usize> = track_idxs
        .iter()
        .enumerate()
        .filter_map(|(slot, &ti)| (!matched_track[slot]).then_some(ti))
        .collect();
    let unmatched_dets: Vec<Detection2D<S>> = det_opt.into_iter().flatten().collect();
    pairs.sort_by_key(|(ti, _)| *ti);
    (pairs, unmatched_tracks, unmatched_dets)
}

/// Multi-modal frame association.
///
/// Cascade mode runs: (1) paired detections on BEV GIoU, (2) pure 3D on BEV
/// GIoU, (3) pure 2D on projected IoU — each stage consuming only tracks the
/// previous stages left unmatched. Single-stage mode associates all
/// 3D-capable detections at once and skips the image-plane stage.
pub fn associate_sync<S: Real>(
    tracks: &[TrackCandidate<S>],
    pre: PreprocessOutput<S>,
    cams: &[CameraModel<S>],
    cfg: &MatcherConfig,
) -> AssociationResult<S> {
    let PreprocessOutput::Sync { mix, pure3d, pure2d } = pre else {
        panic!("associate_sync requires sync preprocessing output");
    };
    let all_tracks: Vec<usize> = (0..tracks.len()).collect();
    let mut out = AssociationResult {
        mix_pairs: Vec::new(),
        pure3d_pairs: Vec::new(),
        pure2d_pairs: Vec::new(),
        async_pairs: Vec::new(),
        unmatched_tracks: Vec::new(),
        unmatched_mix: Vec::new(),
        unmatched_pure3d: Vec::new(),
        unmatched_pure2d: Vec::new(),
    };

    match cfg.mode {
        MatcherMode::Cascade => {
            let (pairs, um_tracks, um_mix) = associate_stage_3d(
                tracks,
                &all_tracks,
                mix,
                |m: &MixDetection<S>| &m.det3d.box3d,
                |m| m.det3d.class.as_str(),
                &cfg.gate_mix,
            );
            out.mix_pairs = pairs;
            out.unmatched_mix = um_mix;

            let (um_tracks, um_pure3d) = if cfg.enable_pure3d_stage {
                let (pairs, um, leftovers) = associate_stage_3d(
                    tracks,
                    &um_tracks,
                    pure3d,
                    |d: &Detection3D<S>| &d.box3d,
                    |d| d.class.as_str(),
                    &cfg.gate_pure3d,
                );
                out.pure3d_pairs = pairs;
                (um, leftovers)
            } else {
                (um_tracks, pure3d)
            };
            out.unmatched_pure3d = um_pure3d;

            let (um_tracks, um_pure2d) = if cfg.enable_pure2d_stage {
                let (pairs, um, leftovers) =
                    associate_stage_2d(tracks, &um_tracks, pure2d, cams, &cfg.gate_pure2d);
                out.pure2d_pairs = pairs;
                (um, leftovers)
            } else {
                (um_tracks, pure2d)
            };
            out.unmatched_pure2d = um_pure2d;
            out.unmatched_tracks = um_tracks;
        }
        MatcherMode::SingleStage => {
            // Flatten paired and pure 3D detections into one stage, tagging
            // the origin so matched pairs land in the right bucket.
            enum Either<S> {
                M(MixDetection<S>),
                P(Detection3D<S>),
            }
            let dets: Vec<Either<S>> = mix
                .into_iter()
                .map(Either::M)
                .chain(pure3d.into_iter().map(Either::P))
                .collect();
            let (pairs, um_tracks, leftovers) = associate_stage_3d(
                tracks,
                &all_tracks,
                dets,
                |e| match e {
                    Either::M(m) => &m.det3d.box3d,
                    Either::P(d) => &d.box3d,
                },
                |e| match e {
                    Either::M(m) => m.det3d.class.as_str(),
                    Either::P(d) => d.class.as_str(),
                },
                &cfg.gate_mix,
            );
            for (ti, e) in pairs {
                match e {
                    Either::M(m) => out.mix_pairs.push((ti, m)),
                    Either::P(d) => out.pure3d_pairs.push((ti, d)),
                }
            }
            for e in leftovers {
                match e {
                    Either::M(m) => out.unmatched_mix.push(m),
                    Either::P(d) => out.unmatched_pure3d.push(d),
                }
            }
            out.unmatched_tracks = um_tracks;
            out.unmatched_pure2d = pure2d;
        }
    }
    out
}

/// Camera-only frame association: the image-plane stage applied to every
/// predicted track.
pub fn associate_async<S: Real>(
    tracks: &[TrackCandidate<S>],
    dets2d: Vec<Detection2D<S>>,
    cams: &[CameraModel<S>],
    cfg: &MatcherConfig,
) -> AssociationResult<S> {
    let all_tracks: Vec<usize> = (0..tracks.len()).collect();
    let (pairs, um_tracks, um_dets) =
        associate_stage_2d(tracks, &all_tracks, dets2d, cams, &cfg.gate_pure2d);
    AssociationResult {
        mix_pairs: Vec::new(),
        pure3d_pairs: Vec::new(),
        pure2d_pairs: Vec::new(),
        async_pairs: pairs,
        unmatched_tracks: um_tracks,
        unmatched_mix: Vec::new(),
        unmatched_pure3d: Vec::new(),
        unmatched_pure2d: um_dets,
    }
}
