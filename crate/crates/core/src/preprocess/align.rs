//! Image-space refinement of paired 3D detections.
//!
//! The paired 2D detection constrains the full 3D state: the refiner
//! minimizes the discrepancy between the projected 3D box and its 2D partner
//! over all seven state dimensions (center, dimensions, heading) with a
//! bounded, derivative-free-friendly residual. Gradients come from central
//! finite differences — the overlap residual has a V-shaped kink at each
//! coordinate's optimum, where a one-sided difference reads a large spurious
//! slope that poisons the whole step. Steps are accepted only when the
//! objective strictly decreases, so the result is never worse than the
//! input.

use crate::config::{AlignMetric, AlignmentConfig};
use crate::geometry::{giou_2d, iou_2d, project_box, Box2D, Box3D, CameraModel};
use crate::scalar::{normalize_angle, real, Real};

use super::{Detection3D, MixDetection};

/// Outcome details for diagnostics and tests.
#[derive(Debug, Clone, Copy)]
pub struct AlignReport<S = f64> {
    pub initial_objective: S,
    pub final_objective: S,
    pub iterations: usize,
    pub improved: bool,
}

const DIMS: usize = 7; // x, y, z, w, l, h, heading

fn state_of<S: Real>(b: &Box3D<S>) -> [S; DIMS] {
    [b.x, b.y, b.z, b.w, b.l, b.h, b.heading]
}

fn box_of<S: Real>(s: &[S; DIMS]) -> Box3D<S> {
    Box3D::new(s[0], s[1], s[2], s[3], s[4], s[5], s[6])
}

/// Objective value for one candidate state; larger is worse.
fn objective<S: Real>(
    state: &[S; DIMS],
    target: &Box2D<S>,
    cam: &CameraModel<S>,
    metric: AlignMetric,
) -> S {
    let projected = project_box(&box_of(state), cam);
    match metric {
        AlignMetric::Iou => match projected {
            Some(r) => S::one() - iou_2d(&r, target),
            None => S::one(),
        },
        AlignMetric::Giou => match projected {
            Some(r) => S::one() - giou_2d(&r, target),
            None => real(2.0),
        },
        AlignMetric::CornerDistance => match projected {
            Some(r) => {
                let diag = (real::<S>(cam.width as f64).powi(2)
                    + real::<S>(cam.height as f64).powi(2))
                .sqrt();
                let d1 = ((r.x1 - target.x1).powi(2) + (r.y1 - target.y1).powi(2)).sqrt();
                let d2 = ((r.x2 - target.x2).powi(2) + (r.y2 - target.y2).powi(2)).sqrt();
                (d1 + d2) / (diag + diag)
            }
            None => real(10.0),
        },
    }
}

/// Per-dimension box constraints (heading is unconstrained, only wrapped).
struct Bounds<S> {
    lo: [S; DIMS],
    hi: [S; DIMS],
}

impl<S: Real> Bounds<S> {
    fn around(initial: &[S; DIMS], class: &str, cfg: &AlignmentConfig) -> Bounds<S> {
        let shift = real::<S>(cfg.max_center_shift);
        let scale = real::<S>(cfg.max_dim_scale.max(1.0));
        let [dim_lo, dim_hi] = cfg.dimension_bounds_for(class);
        let mut lo = [S::neg_infinity(); DIMS];
        let mut hi = [S::infinity(); DIMS];
        for d in 0..3 {
            lo[d] = initial[d] - shift;
            hi[d] = initial[d] + shift;
        }
        for d in 3..6 {
            lo[d] = (initial[d] / scale).max(real(dim_lo));
            hi[d] = (initial[d] * scale).min(real(dim_hi));
        }
        Bounds { lo, hi }
    }

    fn clamp(&self, state: &mut [S; DIMS]) {
        for d in 0..6 {
            state[d] = state[d].max(self.lo[d]).min(self.hi[d]);
        }
        state[6] = normalize_angle(state[6]);
    }
}

/// Refines the paired 3D box so its projection matches the 2D partner.
///
/// Score and class are preserved. When the optimizer cannot improve the
/// objective (flat overlap, already optimal, numerical stall) the input
/// detection is returned unchanged.
pub fn align_mix_detection<S: Real>(
    mix: &MixDetection<S>,
    cam: &CameraModel<S>,
    cfg: &AlignmentConfig,
) -> Detection3D<S> {
    align_mix_detection_report(mix, cam, cfg).0
}

/// As [`align_mix_detection`], additionally reporting objective values.
pub fn align_mix_detection_report<S: Real>(
    mix: &MixDetection<S>,
    cam: &CameraModel<S>,
    cfg: &AlignmentConfig,
) -> (Detection3D<S>, AlignReport<S>) {
    let target = &mix.det2d.box2d;
    let metric = cfg.metric;
    let h = real::<S>(cfg.step);
    let tol = real::<S>(cfg.tolerance);

    let mut state = state_of(&mix.det3d.box3d);
    let bounds = Bounds::around(&state, &mix.det3d.class, cfg);
    let f0 = objective(&state, target, cam, metric);
    let mut report = AlignReport {
        initial_objective: f0,
        final_objective: f0,
        iterations: 0,
        improved: false,
    };

    // Zero-overlap plateau: finite differences see a flat residual.
    let flat = match metric {
        AlignMetric::Iou => f0 >= S::one(),
        AlignMetric::Giou => f0 >= real(2.0),
        AlignMetric::CornerDistance => f0 >= real(10.0),
    };
    if flat || f0 == S::zero() {
        if flat {
            log::debug!("alignment skipped: zero overlap plateau (class {})", mix.det3d.class);
        }
        return (mix.det3d.clone(), report);
    }

    let mut f = f0;
    let mut grad = [S::zero(); DIMS];
    let two = real::<S>(2.0);
    'outer: for iter in 0..cfg.max_iterations {
        report.iterations = iter + 1;
        // Central differences, clamped to the box constraints.
        let mut norm_sq = S::zero();
        for d in 0..DIMS {
            let mut fwd = state;
            fwd[d] += h;
            bounds.clamp(&mut fwd);
            let mut back = state;
            back[d] -= h;
            bounds.clamp(&mut back);
            let span = fwd[d] - back[d];
            grad[d] = if span > S::zero() {
                (objective(&fwd, target, cam, metric) - objective(&back, target, cam, metric))
                    / span
            } else {
                S::zero()
            };
            norm_sq += grad[d] * grad[d];
        }
        if norm_sq <= S::zero() || !norm_sq.is_finite() {
            break;
        }
        // Scalar Gauss-Newton step towards the linearized zero of the
        // residual, halved until the objective strictly decreases.
        let full = f / norm_sq;
        let mut accepted = false;
        let mut scale = full;
        for _ in 0..12 {
            let mut candidate = state;
            for d in 0..DIMS {
                candidate[d] -= grad[d] * scale;
            }
            bounds.clamp(&mut candidate);
            let fc = objective(&candidate, target, cam, metric);
            if fc < f {
                let drop = f - fc;
                state = candidate;
                f = fc;
                accepted = true;
                if drop < tol {
                    break 'outer;
                }
                break;
            }
            scale /= two;
        }
        if !accepted {
            break;
        }
    }

    report.final_objective = f;
    report.improved = f < f0;
    if !report.improved {
        log::debug!(
            "alignment made no progress after {} iterations (objective {f0}), keeping input",
            report.iterations
        );
        return (mix.det3d.clone(), report);
    }
    let mut det = mix.det3d.clone();
    det.box3d = box_of(&state);
    (det, report)
}
