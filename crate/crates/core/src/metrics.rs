//! CLEAR-MOT and recall-averaged MOTA evaluation against ground truth.
//!
//! Matching rule (shared by the evaluator and its brute-force test oracle):
//! per frame and per class, ground-truth objects are assigned to predictions
//! by planar center distance, gated at `dist_gate`, maximizing match count
//! then minimizing total distance (lowest-index tie-break). An identity
//! switch is counted whenever a ground-truth object is matched to a
//! different track id than its most recent earlier match.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assignment::{solve_assignment, CostMatrix};
use crate::sim::GtFrame;
use crate::tracker::TrackSnapshot;

/// Aggregated CLEAR counts over one evaluation pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ClearCounts {
    pub mota: f64,
    pub ids: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
    pub gt_count: u64,
    pub matches: u64,
    pub match_distance_sum: f64,
}

/// One entry of the recall sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecallPoint {
    pub target_recall: f64,
    /// Score threshold achieving the target recall, when one exists.
    pub threshold: Option<f64>,
    pub achieved_recall: f64,
    pub motar: f64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
    pub ids: u64,
    pub mean_match_distance: f64,
}

/// Per-class evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub amota: f64,
    pub amotp: f64,
    pub mota: f64,
    pub ids: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
    pub gt_count: u64,
    pub recall_points: Vec<RecallPoint>,
}

/// Full evaluation report: aggregate plus per-class breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub amota: f64,
    pub amotp: f64,
    pub mota: f64,
    pub ids: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
    pub gt_count: u64,
    pub per_class: BTreeMap<String, ClassReport>,
}

/// Evaluation failures.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("prediction timestamp t={0} does not appear in the ground truth")]
    UnknownTimestamp(f64),
}

fn planar_distance(a: &crate::geometry::Box3D, b: &crate::geometry::Box3D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Standard CLEAR-MOT with center-distance matching.
///
/// Prediction timestamps must be a subset of ground-truth timestamps;
/// ground-truth frames without predictions count every object as missed.
pub fn clear_mot(
    pred: &[TrackSnapshot],
    gt: &[GtFrame],
    dist_gate: f64,
) -> Result<ClearCounts, EvalError> {
    let mut by_time: BTreeMap<u64, &TrackSnapshot> = BTreeMap::new();
    for snap in pred {
        by_time.insert(snap.t.to_bits(), snap);
    }
    for snap in pred {
        if !gt.iter().any(|f| f.t.to_bits() == snap.t.to_bits()) {
            return Err(EvalError::UnknownTimestamp(snap.t));
        }
    }

    let mut counts = ClearCounts::default();
    let mut last_id: BTreeMap<u64, u64> = BTreeMap::new(); // gt id -> track id
    for frame in gt {
        counts.gt_count += frame.objects.len() as u64;
        let empty: Vec<crate::tracker::SnapshotEntry> = Vec::new();
        let entries = by_time
            .get(&frame.t.to_bits())
            .map(|s| &s.entries)
            .unwrap_or(&empty);

        // Per-class sub-assignments.
        let mut classes: Vec<&str> = frame
            .objects
            .iter()
            .map(|o| o.class.as_str())
            .chain(entries.iter().map(|e| e.class.as_str()))
            .collect();
        classes.sort_unstable();
        classes.dedup();

        for class in classes {
            let gt_idx: Vec<usize> = frame
                .objects
                .iter()
                .enumerate()
                .filter_map(|(i, o)| (o.class == class).then_some(i))
                .collect();
            let pr_idx: Vec<usize> = entries
                .iter()
                .enumerate()
                .filter_map(|(i, e)| (e.class == class).then_some(i))
                .collect();
            let costs = CostMatrix::from_fn(gt_idx.len(), pr_idx.len(), |r, c| {
                let d = planar_distance(
                    &frame.objects[gt_idx[r]].box3d,
                    &entries[pr_idx[c]].box3d,
                );
                (d <= dist_gate).then_some(d)
            });
            let assignment = solve_assignment(&costs, dist_gate);
            for p in &assignment.pairs {
                let gt_obj = &frame.objects[gt_idx[p.row]];
                let track_id = entries[pr_idx[p.col]].id;
                if let Some(prev) = last_id.get(&gt_obj.id) {
                    if *prev != track_id {
                        counts.ids += 1;
                    }
                }
                last_id.insert(gt_obj.id, track_id);
                counts.matches += 1;
                counts.match_distance_sum += p.cost;
            }
            counts.fp += assignment.unmatched_cols.len() as u64;
            counts.false_negatives += assignment.unmatched_rows.len() as u64;
        }
    }
    let errors = (counts.fp + counts.false_negatives + counts.ids) as f64;
    counts.mota = if counts.gt_count > 0 {
        1.0 - errors / counts.gt_count as f64
    } else if errors == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(counts)
}

fn filter_by_score(pred: &[TrackSnapshot], threshold: f64) -> Vec<TrackSnapshot> {
    pred.iter()
        .map(|s| TrackSnapshot {
            t: s.t,
            kind: s.kind,
            entries: s.entries.iter().filter(|e| e.score >= threshold).cloned().collect(),
        })
        .collect()
}

fn filter_class(pred: &[TrackSnapshot], gt: &[GtFrame], class: &str) -> (Vec<TrackSnapshot>, Vec<GtFrame>) {
    let p = pred
        .iter()
        .map(|s| TrackSnapshot {
            t: s.t,
            kind: s.kind,
            entries: s.entries.iter().filter(|e| e.class == class).cloned().collect(),
        })
        .collect();
    let g = gt
        .iter()
        .map(|f| GtFrame {
            t: f.t,
            kind: f.kind,
            objects: f.objects.iter().filter(|o| o.class == class).cloned().collect(),
        })
        .collect();
    (p, g)
}

/// Recall-averaged MOTA for one class (callers pass class-filtered inputs).
///
/// For each of `n_thresholds` evenly spaced target recalls, the highest
/// score threshold whose achieved recall reaches the target is selected and
/// the recall-normalized MOTA
/// `max(0, 1 - (fp + fn + ids - (1 - r) * gt) / (r * gt))`
/// is computed at the achieved recall `r`. Targets no threshold reaches
/// contribute zero (and the full gate distance to the precision average).
fn amota_single_class(
    pred: &[TrackSnapshot],
    gt: &[GtFrame],
    dist_gate: f64,
    n_thresholds: usize,
) -> Result<(f64, f64, Vec<RecallPoint>), EvalError> {
    let gt_total: u64 = gt.iter().map(|f| f.objects.len() as u64).sum();
    if gt_total == 0 {
        return Ok((0.0, dist_gate, Vec::new()));
    }

    // Candidate thresholds: unique prediction scores, descending.
    let mut scores: Vec<f64> = pred
        .iter()
        .flat_map(|s| s.entries.iter().map(|e| e.score))
        .collect();
    scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
    scores.dedup();

    // CLEAR counts per candidate, in descending-score order (recall grows).
    let mut curve: Vec<(f64, ClearCounts)> = Vec::with_capacity(scores.len());
    for &s in &scores {
        let filtered = filter_by_score(pred, s);
        let counts = clear_mot(&filtered, gt, dist_gate)?;
        curve.push((s, counts));
    }

    let mut points = Vec::with_capacity(n_thresholds);
    let mut amota_sum = 0.0;
    let mut amotp_sum = 0.0;
    for k in 1..=n_thresholds {
        let target = k as f64 / n_thresholds as f64;
        let hit = curve.iter().find(|(_, c)| {
            c.matches as f64 / gt_total as f64 >= target
        });
        match hit {
            Some((threshold, c)) => {
                let recall = c.matches as f64 / gt_total as f64;
                let errors = (c.fp + c.false_negatives + c.ids) as f64;
                let motar = (1.0
                    - (errors - (1.0 - recall) * gt_total as f64) / (recall * gt_total as f64))
                    .max(0.0);
                let mean_dist = if c.matches > 0 {
                    c.match_distance_sum / c.matches as f64
                } else {
                    dist_gate
                };
                amota_sum += motar;
                amotp_sum += mean_dist;
                points.push(RecallPoint {
                    target_recall: target,
                    threshold: Some(*threshold),
                    achieved_recall: recall,
                    motar,
                    fp: c.fp,
                    false_negatives: c.false_negatives,
                    ids: c.ids,
                    mean_match_distance: mean_dist,
                });
            }
            None => {
                amotp_sum += dist_gate;
                points.push(RecallPoint {
                    target_recall: target,
                    threshold: None,
                    achieved_recall: 0.0,
                    motar: 0.0,
                    fp: 0,
                    false_negatives: gt_total,
                    ids: 0,
                    mean_match_distance: dist_gate,
                });
            }
        }
    }
    Ok((
        amota_sum / n_thresholds as f64,
        amotp_sum / n_thresholds as f64,
        points,
    ))
}

/// Full evaluation: per-class recall sweeps plus aggregate CLEAR counts.
///
/// The aggregate AMOTA/AMOTP average the per-class values over classes
/// present in the ground truth; MOTA and the error counts come from the
/// unthresholded prediction set summed over classes.
pub fn amota(
    pred: &[TrackSnapshot],
    gt: &[GtFrame],
    dist_gate: f64,
    n_thresholds: usize,
) -> Result<EvalReport, EvalError> {
    let mut classes: Vec<String> = gt
        .iter()
        .flat_map(|f| f.objects.iter().map(|o| o.class.clone()))
        .collect();
    classes.sort();
    classes.dedup();

    let mut per_class = BTreeMap::new();
    let mut amota_sum = 0.0;
    let mut amotp_sum = 0.0;
    for class in &classes {
        let (p, g) = filter_class(pred, gt, class);
        let (class_amota, class_amotp, points) =
            amota_single_class(&p, &g, dist_gate, n_thresholds)?;
        let counts = clear_mot(&p, &g, dist_gate)?;
        amota_sum += class_amota;
        amotp_sum += class_amotp;
        per_class.insert(
            class.clone(),
            ClassReport {
                amota: class_amota,
                amotp: class_amotp,
                mota: counts.mota,
                ids: counts.ids,
                fp: counts.fp,
                false_negatives: counts.false_negatives,
                gt_count: counts.gt_count,
                recall_points: points,
            },
        );
    }

    // Aggregate counts include predictions whose class has no ground truth.
    let overall = clear_mot(pred, gt, dist_gate)?;
    let n_classes = classes.len().max(1) as f64;
    Ok(EvalReport {
        amota: if classes.is_empty() { 0.0 } else { amota_sum / n_classes },
        amotp: if classes.is_empty() { dist_gate } else { amotp_sum / n_classes },
        mota: overall.mota,
        ids: overall.ids,
        fp: overall.fp,
        false_negatives: overall.false_negatives,
        gt_count: overall.gt_count,
        per_class,
    })
}

/// Fixed-width text table mirroring the usual benchmark layout.
pub fn format_report(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14} {:>7} {:>7} {:>7} {:>6} {:>6} {:>6} {:>7}\n",
        "class", "AMOTA", "AMOTP", "MOTA", "IDS", "FP", "FN", "GT"
    ));
    for (class, c) in &report.per_class {
        out.push_str(&format!(
            "{:<14} {:>7.3} {:>7.3} {:>7.3} {:>6} {:>6} {:>6} {:>7}\n",
            class, c.amota, c.amotp, c.mota, c.ids, c.fp, c.false_negatives, c.gt_count
        ));
    }
    out.push_str(&format!(
        "{:<14} {:>7.3} {:>7.3} {:>7.3} {:>6} {:>6} {:>6} {:>7}\n",
        "overall",
        report.amota,
        report.amotp,
        report.mota,
        report.ids,
        report.fp,
        report.false_negatives,
        report.gt_count
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Box3D;
    use crate::sim::GtObject;
    use crate::tracker::{FrameKind, SnapshotEntry};
    use approx::assert_relative_eq;

    fn gt_obj(id: u64, x: f64, y: f64) -> GtObject {
        GtObject {
            id,
            class: "car".to_string(),
            box3d: Box3D::new(x, y, 0.0, 2.0, 4.0, 1.5, 0.0),
            vx: 0.0,
            vy: 0.0,
        }
    }

    fn entry(id: u64, x: f64, y: f64, score: f64) -> SnapshotEntry {
        SnapshotEntry {
            id,
            class: "car".to_string(),
            box3d: Box3D::new(x, y, 0.0, 2.0, 4.0, 1.5, 0.0),
            vx: 0.0,
            vy: 0.0,
            score,
            status: crate::estimation::TrackStatus::Active,
        }
    }

    fn perfect_scene(frames: usize) -> (Vec<TrackSnapshot>, Vec<GtFrame>) {
        let mut pred = Vec::new();
        let mut gt = Vec::new();
        for i in 0..frames {
            let t = i as f64 * 0.5;
            let x = 5.0 + i as f64;
            gt.push(GtFrame {
                t,
                kind: FrameKind::Sync,
                objects: vec![gt_obj(1, x, 0.0)],
            });
            pred.push(TrackSnapshot {
                t,
                kind: FrameKind::Sync,
                entries: vec![entry(10, x, 0.0, 0.9)],
            });
        }
        (pred, gt)
    }

    #[test]
    fn perfect_tracking_scores_one() {
        let (pred, gt) = perfect_scene(10);
        let counts = clear_mot(&pred, &gt, 2.0).unwrap();
        assert_relative_eq!(counts.mota, 1.0);
        assert_eq!((counts.ids, counts.fp, counts.false_negatives), (0, 0, 0));
        let report = amota(&pred, &gt, 2.0, 40).unwrap();
        assert_relative_eq!(report.amota, 1.0);
        assert_relative_eq!(report.amotp, 0.0);
    }

    #[test]
    fn empty_predictions_miss_everything() {
        let (_, gt) = perfect_scene(10);
        let counts = clear_mot(&[], &gt, 2.0).unwrap();
        assert_eq!(counts.false_negatives, 10);
        assert!(counts.mota <= 0.0);
        let report = amota(&[], &gt, 2.0, 40).unwrap();
        assert_relative_eq!(report.amota, 0.0);
    }

    #[test]
    fn identity_swap_counts_two_switches() {
        // 2 objects, 10 frames, identities swapped from frame 5 onward:
        // IDS = 2, MOTA = 1 - 2/20 = 0.9.
        let mut pred = Vec::new();
        let mut gt = Vec::new();
        for i in 0..10 {
            let t = i as f64 * 0.5;
            gt.push(GtFrame {
                t,
                kind: FrameKind::Sync,
                objects: vec![gt_obj(1, 0.0, 0.0), gt_obj(2, 20.0, 0.0)],
            });
            let (id_a, id_b) = if i < 5 { (100, 200) } else { (200, 100) };
            pred.push(TrackSnapshot {
                t,
                kind: FrameKind::Sync,
                entries: vec![entry(id_a, 0.0, 0.0, 0.9), entry(id_b, 20.0, 0.0, 0.9)],
            });
        }
        let counts = clear_mot(&pred, &gt, 2.0).unwrap();
        assert_eq!(counts.ids, 2);
        assert_eq!(counts.fp, 0);
        assert_eq!(counts.false_negatives, 0);
        assert_relative_eq!(counts.mota, 0.9);
    }

    #[test]
    fn prediction_at_unknown_timestamp_is_rejected() {
        let (mut pred, gt) = perfect_scene(3);
        pred[1].t = 0.123;
        assert!(matches!(
            clear_mot(&pred, &gt, 2.0),
            Err(EvalError::UnknownTimestamp(_))
        ));
    }

    #[test]
    fn out_of_gate_predictions_are_false_positives() {
        let (mut pred, gt) = perfect_scene(1);
        pred[0].entries[0].box3d.x += 5.0; // beyond the 2 m gate
        let counts = clear_mot(&pred, &gt, 2.0).unwrap();
        assert_eq!(counts.fp, 1);
        assert_eq!(counts.false_negatives, 1);
    }

    #[test]
    fn relabeling_track_ids_does_not_change_results() {
        let (pred, gt) = perfect_scene(10);
        let relabeled: Vec<TrackSnapshot> = pred
            .iter()
            .map(|s| TrackSnapshot {
                t: s.t,
                kind: s.kind,
                entries: s
                    .entries
                    .iter()
                    .map(|e| SnapshotEntry { id: e.id * 31 + 7, ..e.clone() })
                    .collect(),
            })
            .collect();
        let a = clear_mot(&pred, &gt, 2.0).unwrap();
        let b = clear_mot(&relabeled, &gt, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn raising_score_cutoff_never_increases_false_positives() {
        // A scene with spurious low-score predictions.
        let (mut pred, gt) = perfect_scene(10);
        for (i, snap) in pred.iter_mut().enumerate() {
            if i % 2 == 0 {
                snap.entries.push(entry(999, 50.0, 50.0, 0.3));
            }
        }
        let mut last_fp = u64::MAX;
        for cutoff in [0.0, 0.2, 0.4, 0.8, 1.0] {
            let filtered = filter_by_score(&pred, cutoff);
            let counts = clear_mot(&filtered, &gt, 2.0).unwrap();
            assert!(counts.fp <= last_fp);
            last_fp = counts.fp;
        }
    }

    #[test]
    fn half_coverage_track_yields_intermediate_amota() {
        // Track exists in exactly half the frames with uniform scores.
        let mut pred = Vec::new();
        let mut gt = Vec::new();
        for i in 0..10 {
            let t = i as f64 * 0.5;
            gt.push(GtFrame {
                t,
                kind: FrameKind::Sync,
                objects: vec![gt_obj(1, 5.0, 0.0)],
            });
            let entries = if i < 5 { vec![entry(1, 5.0, 0.0, 0.8)] } else { Vec::new() };
            pred.push(TrackSnapshot { t, kind: FrameKind::Sync, entries });
        }
        let report = amota(&pred, &gt, 2.0, 40).unwrap();
        // Recall never exceeds 0.5: the upper half of the sweep contributes 0.
        assert!(report.amota > 0.0 && report.amota < 0.75);
        let car = &report.per_class["car"];
        assert!(car.recall_points.iter().filter(|p| p.threshold.is_some()).count() == 20);
    }

    #[test]
    fn report_table_lists_every_class() {
        let (pred, gt) = perfect_scene(4);
        let report = amota(&pred, &gt, 2.0, 10).unwrap();
        let table = format_report(&report);
        assert!(table.contains("car"));
        assert!(table.contains("overall"));
    }
}
