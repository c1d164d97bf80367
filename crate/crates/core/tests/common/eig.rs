//! Symmetric eigenvalue bounds via cyclic Jacobi rotations.
//!
//! Small, self-contained oracle for positive-semidefiniteness checks on the
//! 9x9 track covariance; intentionally independent of the filter code.

const N: usize = 9;

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue_sym(a: &[[f64; N]; N]) -> f64 {
    let mut m = *a;
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..N {
            for j in i + 1..N {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let sign = if theta < 0.0 { -1.0 } else { 1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = m[k][p];
                    let akq = m[k][q];
                    m[k][p] = c * akp - s * akq;
                    m[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = m[p][k];
                    let aqk = m[q][k];
                    m[p][k] = c * apk - s * aqk;
                    m[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..N).map(|i| m[i][i]).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_min_is_smallest_entry() {
        let mut a = [[0.0; N]; N];
        for (i, v) in [4.0, 2.0, 7.0, 0.5, 3.0, 9.0, 1.5, 6.0, 8.0].into_iter().enumerate() {
            a[i][i] = v;
        }
        assert!((min_eigenvalue_sym(&a) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn embedded_two_by_two_block_has_known_eigenvalues() {
        // Block [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let mut a = [[0.0; N]; N];
        for i in 0..N {
            a[i][i] = 5.0;
        }
        a[0][0] = 2.0;
        a[1][1] = 2.0;
        a[0][1] = 1.0;
        a[1][0] = 1.0;
        assert!((min_eigenvalue_sym(&a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn indefinite_matrix_reports_negative_eigenvalue() {
        let mut a = [[0.0; N]; N];
        for i in 0..N {
            a[i][i] = 1.0;
        }
        // [[1, 2], [2, 1]] block has eigenvalues -1 and 3.
        a[0][1] = 2.0;
        a[1][0] = 2.0;
        assert!((min_eigenvalue_sym(&a) + 1.0).abs() < 1e-10);
    }
}
