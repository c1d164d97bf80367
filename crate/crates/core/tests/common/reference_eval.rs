//! Brute-force reference evaluator.
//!
//! Implements the shared evaluation definition (per-frame, per-class,
//! center-distance matching maximizing match count then minimizing total
//! distance with lowest-index tie-breaks; switches counted on ground-truth
//! reassignment; recall-swept normalized MOTA) by exhaustive enumeration
//! instead of the library's assignment solver. Only feasible for tiny
//! scenes, which is the point: it cross-checks the fast path.

use std::collections::BTreeMap;

use asyncmot::sim::GtFrame;
use asyncmot::tracker::TrackSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RefCounts {
    pub mota: f64,
    pub ids: u64,
    pub fp: u64,
    pub fn_: u64,
    pub gt_count: u64,
    pub matches: u64,
    pub dist_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefClassReport {
    pub amota: f64,
    pub amotp: f64,
    pub counts: RefCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefReport {
    pub amota: f64,
    pub amotp: f64,
    pub counts: RefCounts,
    pub per_class: BTreeMap<String, RefClassReport>,
}

/// Exhaustive best matching of one frame-class group: maximize matches,
/// then minimize total distance; candidates scanned in ascending prediction
/// index so the first optimum found is the lexicographically smallest.
fn best_matching(dists: &[Vec<Option<f64>>]) -> Vec<Option<usize>> {
    fn recurse(
        dists: &[Vec<Option<f64>>],
        row: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<Option<usize>>,
        best: &mut Option<(usize, f64, Vec<Option<usize>>)>,
    ) {
        if row == dists.len() {
            let count = current.iter().flatten().count();
            let total: f64 = current
                .iter()
                .enumerate()
                .filter_map(|(r, c)| c.map(|c| dists[r][c].unwrap()))
                .sum();
            let better = match best {
                Some((bc, bt, _)) => count > *bc || (count == *bc && total < *bt),
                None => true,
            };
            if better {
                *best = Some((count, total, current.clone()));
            }
            return;
        }
        let cols = if dists.is_empty() { 0 } else { dists[row].len() };
        for c in 0..cols {
            if !used[c] && dists[row][c].is_some() {
                used[c] = true;
                current.push(Some(c));
                recurse(dists, row + 1, used, current, best);
                current.pop();
                used[c] = false;
            }
        }
        current.push(None);
        recurse(dists, row + 1, used, current, best);
        current.pop();
    }
    if dists.is_empty() {
        return Vec::new();
    }
    let cols = dists[0].len();
    let mut best = None;
    recurse(dists, 0, &mut vec![false; cols], &mut Vec::new(), &mut best);
    best.unwrap().2
}

pub fn ref_clear(pred: &[TrackSnapshot], gt: &[GtFrame], gate: f64) -> RefCounts {
    let mut counts = RefCounts::default();
    let mut last_id: BTreeMap<u64, u64> = BTreeMap::new();
    for frame in gt {
        counts.gt_count += frame.objects.len() as u64;
        let entries: Vec<_> = pred
            .iter()
            .find(|s| s.t.to_bits() == frame.t.to_bits())
            .map(|s| s.entries.clone())
            .unwrap_or_default();

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
            let dists: Vec<Vec<Option<f64>>> = gt_idx
                .iter()
                .map(|&g| {
                    pr_idx
                        .iter()
                        .map(|&p| {
                            let o = &frame.objects[g].box3d;
                            let e = &entries[p].box3d;
                            let d = (o.x - e.x).hypot(o.y - e.y);
                            (d <= gate).then_some(d)
                        })
                        .collect()
                })
                .collect();
            let matching = best_matching(&dists);
            let mut used_pred = vec![false; pr_idx.len()];
            for (r, col) in matching.iter().enumerate() {
                match col {
                    Some(c) => {
                        used_pred[*c] = true;
                        let gt_obj = &frame.objects[gt_idx[r]];
                        let track_id = entries[pr_idx[*c]].id;
                        if let Some(prev) = last_id.get(&gt_obj.id) {
                            if *prev != track_id {
                                counts.ids += 1;
                            }
                        }
                        last_id.insert(gt_obj.id, track_id);
                        counts.matches += 1;
                        counts.dist_sum += dists[r][*c].unwrap();
                    }
                    None => counts.fn_ += 1,
                }
            }
            counts.fp += used_pred.iter().filter(|u| !**u).count() as u64;
        }
    }
    let errors = (counts.fp + counts.fn_ + counts.ids) as f64;
    counts.mota = if counts.gt_count > 0 {
        1.0 - errors / counts.gt_count as f64
    } else if errors == 0.0 {
        1.0
    } else {
        0.0
    };
    counts
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

fn filter_class(
    pred: &[TrackSnapshot],
    gt: &[GtFrame],
    class: &str,
) -> (Vec<TrackSnapshot>, Vec<GtFrame>) {
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

fn ref_amota_single_class(
    pred: &[TrackSnapshot],
    gt: &[GtFrame],
    gate: f64,
    n_thresholds: usize,
) -> (f64, f64) {
    let gt_total: u64 = gt.iter().map(|f| f.objects.len() as u64).sum();
    if gt_total == 0 {
        return (0.0, gate);
    }
    let mut scores: Vec<f64> = pred
        .iter()
        .flat_map(|s| s.entries.iter().map(|e| e.score))
        .collect();
    scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
    scores.dedup();
    let curve: Vec<(f64, RefCounts)> = scores
        .iter()
        .map(|&s| (s, ref_clear(&filter_by_score(pred, s), gt, gate)))
        .collect();

    let mut amota_sum = 0.0;
    let mut amotp_sum = 0.0;
    for k in 1..=n_thresholds {
        let target = k as f64 / n_thresholds as f64;
        match curve.iter().find(|(_, c)| c.matches as f64 / gt_total as f64 >= target) {
            Some((_, c)) => {
                let recall = c.matches as f64 / gt_total as f64;
                let errors = (c.fp + c.fn_ + c.ids) as f64;
                let motar = (1.0
                    - (errors - (1.0 - recall) * gt_total as f64) / (recall * gt_total as f64))
                    .max(0.0);
                amota_sum += motar;
                amotp_sum += if c.matches > 0 { c.dist_sum / c.matches as f64 } else { gate };
            }
            None => {
                amotp_sum += gate;
            }
        }
    }
    (amota_sum / n_thresholds as f64, amotp_sum / n_thresholds as f64)
}

pub fn ref_amota(
    pred: &[TrackSnapshot],
    gt: &[GtFrame],
    gate: f64,
    n_thresholds: usize,
) -> RefReport {
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
        let (a, ap) = ref_amota_single_class(&p, &g, gate, n_thresholds);
        let counts = ref_clear(&p, &g, gate);
        amota_sum += a;
        amotp_sum += ap;
        per_class.insert(class.clone(), RefClassReport { amota: a, amotp: ap, counts });
    }
    let counts = ref_clear(pred, gt, gate);
    let n_classes = classes.len().max(1) as f64;
    RefReport {
        amota: if classes.is_empty() { 0.0 } else { amota_sum / n_classes },
        amotp: if classes.is_empty() { gate } else { amotp_sum / n_classes },
        counts,
        per_class,
    }
}
