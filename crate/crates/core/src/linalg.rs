//! Minimal fixed-size linear algebra used by projection and filtering.

use crate::scalar::Real;

/// 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3<S = f64>(pub [S; 3]);

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<S = f64>(pub [[S; 3]; 3]);

impl<S: Real> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Vec3([x, y, z])
    }

    pub fn x(&self) -> S {
        self.0[0]
    }

    pub fn y(&self) -> S {
        self.0[1]
    }

    pub fn z(&self) -> S {
        self.0[2]
    }

    pub fn add(&self, other: &Vec3<S>) -> Vec3<S> {
        Vec3([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    pub fn sub(&self, other: &Vec3<S>) -> Vec3<S> {
        Vec3([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    pub fn scale(&self, k: S) -> Vec3<S> {
        Vec3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }

    pub fn dot(&self, other: &Vec3<S>) -> S {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> S {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Vec3<S> {
        let n = self.norm();
        self.scale(S::one() / n)
    }

    pub fn cross(&self, other: &Vec3<S>) -> Vec3<S> {
        let a = &self.0;
        let b = &other.0;
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }
}

impl<S: Real> Mat3<S> {
    pub fn identity() -> Self {
        let o = S::one();
        let z = S::zero();
        Mat3([[o, z, z], [z, o, z], [z, z, o]])
    }

    /// Rotation by `theta` about the vertical (z) axis.
    pub fn rot_z(theta: S) -> Self {
        let (s, c) = theta.sin_cos();
        let z = S::zero();
        let o = S::one();
        Mat3([[c, -s, z], [s, c, z], [z, z, o]])
    }

    pub fn transpose(&self) -> Mat3<S> {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: &Vec3<S>) -> Vec3<S> {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    pub fn mul_mat(&self, other: &Mat3<S>) -> Mat3<S> {
        let mut out = [[S::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = S::zero();
                for k in 0..3 {
                    acc += self.0[i][k] * other.0[k][j];
                }
                *cell = acc;
            }
        }
        Mat3(out)
    }

    /// Inverse via the adjugate; returns `None` when the determinant is
    /// numerically zero.
    pub fn inverse(&self) -> Option<Mat3<S>> {
        let m = &self.0;
        let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
        let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
        let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
        let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
        if det.abs() < S::epsilon() * crate::scalar::real::<S>(1e3) {
            return None;
        }
        let inv_det = S::one() / det;
        let c10 = m[0][2] * m[2][1] - m[0][1] * m[2][2];
        let c11 = m[0][0] * m[2][2] - m[0][2] * m[2][0];
        let c12 = m[0][1] * m[2][0] - m[0][0] * m[2][1];
        let c20 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
        let c21 = m[0][2] * m[1][0] - m[0][0] * m[1][2];
        let c22 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        Some(Mat3([
            [c00 * inv_det, c10 * inv_det, c20 * inv_det],
            [c01 * inv_det, c11 * inv_det, c21 * inv_det],
            [c02 * inv_det, c12 * inv_det, c22 * inv_det],
        ]))
    }

    /// Frobenius norm of `R^T R - I`; zero for orthonormal matrices.
    pub fn orthonormality_defect(&self) -> S {
        let g = self.transpose().mul_mat(self);
        let mut acc = S::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { S::one() } else { S::zero() };
                let d = g.0[i][j] - target;
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    /// Rodrigues' formula: rotation matrix for an axis-angle vector.
    pub fn from_axis_angle(w: &Vec3<S>) -> Mat3<S> {
        let angle = w.norm();
        if angle < S::epsilon() {
            return Mat3::identity();
        }
        let axis = w.scale(S::one() / angle);
        let (s, c) = angle.sin_cos();
        let t = S::one() - c;
        let (x, y, z) = (axis.0[0], axis.0[1], axis.0[2]);
        Mat3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Nearest orthonormal matrix via Gram-Schmidt on the rows.
    pub fn reorthonormalized(&self) -> Mat3<S> {
        let r0 = Vec3(self.0[0]).normalized();
        let mut r1 = Vec3(self.0[1]);
        r1 = r1.sub(&r0.scale(r0.dot(&r1)));
        let r1 = r1.normalized();
        let r2 = r0.cross(&r1);
        Mat3([r0.0, r1.0, r2.0])
    }
}

/// Solves the symmetric positive-definite system `A x = b` for multiple
/// right-hand sides using Gaussian elimination with partial pivoting.
///
/// `a` is `n x n` row-major, `b` is `n x m` row-major; both are consumed.
/// Returns the `n x m` solution, or `None` when the system is singular.
pub fn solve_multi<S: Real>(
    mut a: Vec<Vec<S>>,
    mut b: Vec<Vec<S>>,
) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    if n == 0 {
        return Some(b);
    }
    let m = b[0].len();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < S::epsilon() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / diag;
            if factor == S::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            for k in 0..m {
                let v = b[col][k];
                b[row][k] -= factor * v;
            }
        }
    }
    for row in 0..n {
        let diag = a[row][row];
        for k in 0..m {
            b[row][k] /= diag;
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rotation_inverse_is_transpose() {
        let r = Mat3::<f64>::rot_z(0.7);
        let inv = r.inverse().unwrap();
        let rt = r.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(inv.0[i][j], rt.0[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn axis_angle_round_trip_is_orthonormal() {
        let r = Mat3::<f64>::from_axis_angle(&Vec3::new(0.1, -0.2, 0.3));
        assert!(r.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn solver_matches_hand_inverse() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let b = vec![vec![1.0], vec![2.0]];
        let x = solve_multi(a, b).unwrap();
        // [[4,1],[1,3]]^-1 [1,2]^T = 1/11 [3-2, -1+8] = [1/11, 7/11]
        assert_relative_eq!(x[0][0], 1.0 / 11.0, epsilon = 1e-12);
        assert_relative_eq!(x[1][0], 7.0 / 11.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = vec![vec![1.0], vec![2.0]];
        assert!(solve_multi(a, b).is_none());
    }
}
