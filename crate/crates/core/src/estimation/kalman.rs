//! Constant-velocity Kalman filtering on the 9-dim track state.
//!
//! State layout: `[x, y, z, w, l, h, heading, vx, vy]`. Planar position is
//! driven by the velocity components; z, dimensions and heading follow a
//! random walk. Updates use the Joseph form to keep covariances symmetric
//! positive semidefinite.

use crate::linalg::solve_multi;
use crate::scalar::{normalize_angle, real, Real};

pub const STATE_DIM: usize = 9;
pub const IDX_HEADING: usize = 6;

pub type StateVec<S> = [S; STATE_DIM];
pub type CovMat<S> = [[S; STATE_DIM]; STATE_DIM];

/// Resolved per-class noise parameters.
#[derive(Debug, Clone, Copy)]
pub struct NoiseParams<S = f64> {
    /// Inflation factor for camera-only position observations.
    pub gamma: S,
    /// Measurement variance: position, dims, heading.
    pub c_position: S,
    pub c_dims: S,
    pub c_heading: S,
    /// Process noise spectral densities.
    pub q_accel: S,
    pub q_z: S,
    pub q_dims: S,
    pub q_heading: S,
    /// Initial covariance diagonal: position, dims, heading, velocity.
    pub init_position: S,
    pub init_dims: S,
    pub init_heading: S,
    pub init_velocity: S,
    /// Robust cap (meters) on lifted-position innovations.
    pub lift_innovation_cap: S,
}

impl NoiseParams<f64> {
    pub fn from_config(cfg: &crate::config::MotionConfig, class: &str) -> Self {
        let mv = cfg.measurement_var.get(class);
        NoiseParams {
            gamma: *cfg.gamma.get(class),
            c_position: mv.position,
            c_dims: mv.dims,
            c_heading: mv.heading,
            q_accel: cfg.process.accel,
            q_z: cfg.process.z,
            q_dims: cfg.process.dims,
            q_heading: cfg.process.heading,
            init_position: cfg.initial_var.position,
            init_dims: cfg.initial_var.dims,
            init_heading: cfg.initial_var.heading,
            init_velocity: cfg.initial_var.velocity,
            lift_innovation_cap: cfg.lift_innovation_cap,
        }
    }
}

impl<S: Real> NoiseParams<S> {
    pub fn initial_cov(&self) -> CovMat<S> {
        let mut p = [[S::zero(); STATE_DIM]; STATE_DIM];
        let diag = [
            self.init_position,
            self.init_position,
            self.init_position,
            self.init_dims,
            self.init_dims,
            self.init_dims,
            self.init_heading,
            self.init_velocity,
            self.init_velocity,
        ];
        for (i, v) in diag.into_iter().enumerate() {
            p[i][i] = v;
        }
        p
    }
}

/// Numerical failure during a covariance update.
#[derive(Debug, thiserror::Error)]
#[error("kalman update produced a singular innovation covariance")]
pub struct NumericalFault;

fn transition<S: Real>(dt: S) -> CovMat<S> {
    let mut f = [[S::zero(); STATE_DIM]; STATE_DIM];
    for (i, row) in f.iter_mut().enumerate() {
        row[i] = S::one();
    }
    f[0][7] = dt;
    f[1][8] = dt;
    f
}

fn mat_mul<S: Real>(a: &CovMat<S>, b: &CovMat<S>) -> CovMat<S> {
    let mut out = [[S::zero(); STATE_DIM]; STATE_DIM];
    for i in 0..STATE_DIM {
        for k in 0..STATE_DIM {
            let aik = a[i][k];
            if aik == S::zero() {
                continue;
            }
            for j in 0..STATE_DIM {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat_transpose<S: Real>(a: &CovMat<S>) -> CovMat<S> {
    let mut out = [[S::zero(); STATE_DIM]; STATE_DIM];
    for i in 0..STATE_DIM {
        for j in 0..STATE_DIM {
            out[j][i] = a[i][j];
        }
    }
    out
}

fn symmetrize<S: Real>(p: &mut CovMat<S>) {
    let half = real::<S>(0.5);
    for i in 0..STATE_DIM {
        for j in i + 1..STATE_DIM {
            let v = (p[i][j] + p[j][i]) * half;
            p[i][j] = v;
            p[j][i] = v;
        }
    }
}

/// Time update over `dt` seconds; mean follows the constant-velocity model,
/// covariance gains process noise (trace is non-decreasing).
pub fn predict<S: Real>(state: &mut StateVec<S>, cov: &mut CovMat<S>, dt: S, noise: &NoiseParams<S>) {
    state[0] += state[7] * dt;
    state[1] += state[8] * dt;
    state[IDX_HEADING] = normalize_angle(state[IDX_HEADING]);

    let f = transition(dt);
    let mut p = mat_mul(&f, cov);
    p = mat_mul(&p, &mat_transpose(&f));

    // White-acceleration blocks for (x, vx) and (y, vy).
    let third = real::<S>(1.0 / 3.0);
    let half = real::<S>(0.5);
    let dt2 = dt * dt;
    let dt3 = dt2 * dt;
    for (pos, vel) in [(0usize, 7usize), (1usize, 8usize)] {
        p[pos][pos] += noise.q_accel * dt3 * third;
        p[pos][vel] += noise.q_accel * dt2 * half;
        p[vel][pos] += noise.q_accel * dt2 * half;
        p[vel][vel] += noise.q_accel * dt;
    }
    p[2][2] += noise.q_z * dt;
    for d in 3..6 {
        p[d][d] += noise.q_dims * dt;
    }
    p[IDX_HEADING][IDX_HEADING] += noise.q_heading * dt;

    symmetrize(&mut p);
    *cov = p;
    *state = {
        let mut s = *state;
        s[IDX_HEADING] = normalize_angle(s[IDX_HEADING]);
        s
    };
}

/// Measurement update observing `obs_idx` state components with diagonal
/// noise `r_diag`. Heading innovations are wrapped.
pub fn update<S: Real>(
    state: &mut StateVec<S>,
    cov: &mut CovMat<S>,
    obs: &[S],
    obs_idx: &[usize],
    r_diag: &[S],
) -> Result<(), NumericalFault> {
    let m = obs_idx.len();
    debug_assert_eq!(obs.len(), m);
    debug_assert_eq!(r_diag.len(), m);

    let mut innovation = vec![S::zero(); m];
    for k in 0..m {
        let idx = obs_idx[k];
        let mut y = obs[k] - state[idx];
        if idx == IDX_HEADING {
            y = normalize_angle(y);
        }
        innovation[k] = y;
    }

    // Innovation covariance and cross term.
    let mut s_mat = vec![vec![S::zero(); m]; m];
    for k in 0..m {
        for l in 0..m {
            s_mat[k][l] = cov[obs_idx[k]][obs_idx[l]];
        }
        s_mat[k][k] += r_diag[k];
    }
    let mut hp = vec![vec![S::zero(); STATE_DIM]; m];
    for k in 0..m {
        hp[k].copy_from_slice(&cov[obs_idx[k]]);
    }
    // K = P H^T S^-1, i.e. S K^T = H P.
    let kt = solve_multi(s_mat, hp).ok_or(NumericalFault)?;

    for i in 0..STATE_DIM {
        let mut dx = S::zero();
        for k in 0..m {
            dx += kt[k][i] * innovation[k];
        }
        state[i] += dx;
    }
    state[IDX_HEADING] = normalize_angle(state[IDX_HEADING]);

    // Joseph form: P = (I - K H) P (I - K H)^T + K R K^T.
    let mut a = [[S::zero(); STATE_DIM]; STATE_DIM];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = S::one();
        for k in 0..m {
            row[obs_idx[k]] -= kt[k][i];
        }
    }
    let mut p = mat_mul(&a, cov);
    p = mat_mul(&p, &mat_transpose(&a));
    for i in 0..STATE_DIM {
        for j in 0..STATE_DIM {
            let mut acc = S::zero();
            for k in 0..m {
                acc += kt[k][i] * r_diag[k] * kt[k][j];
            }
            p[i][j] += acc;
        }
    }
    symmetrize(&mut p);
    *cov = p;
    Ok(())
}

pub fn trace<S: Real>(p: &CovMat<S>) -> S {
    (0..STATE_DIM).map(|i| p[i][i]).sum()
}
